/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "splatpart/error.hpp"

namespace splatpart {

inline constexpr int kShCoeffs = 16;              // degree 0..3
inline constexpr int kShDim = kShCoeffs * 3;      // 48 values, channel-major

using ShVector = Eigen::Matrix<double, kShDim, 1>;

/// One splat. Quaternions use the Hamilton convention with scalar-first
/// storage (w, x, y, z). Scales are linear and strictly positive; any
/// log-space handling is confined to file I/O.
struct GaussianComponent {
    Eigen::Vector3d mu = Eigen::Vector3d::Zero();
    Eigen::Vector4d rot = Eigen::Vector4d(1, 0, 0, 0); // (w, x, y, z), unit norm
    Eigen::Vector3d scale = Eigen::Vector3d::Ones();
    double opacity = 0.5;                              // open interval (0, 1)
    ShVector sh = ShVector::Zero();                    // sh[channel * 16 + coeff]
    int binding = 0;                                   // parent triangle index
};

struct Mesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;

    int triangle_count() const { return static_cast<int>(triangles.size()); }
};

/// Rigid frame plus uniform scale of one mesh triangle.
struct TriangleFrame {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity(); // orthonormal, det +1
    Eigen::Vector3d T = Eigen::Vector3d::Zero();     // vertex centroid
    double k = 1.0;                                  // mean edge length
};

enum class CoordinateSpace { Local, Global };

struct Avatar {
    Mesh mesh;
    std::vector<GaussianComponent> gaussians;
    std::optional<std::vector<TriangleFrame>> frame_cache;
    CoordinateSpace space = CoordinateSpace::Local;
    std::string id;

    std::size_t size() const { return gaussians.size(); }
};

/// Options for the local<->global transform pair. The printed rule leaves the
/// position unscaled by k; scale_position switches to mu' = k*R*mu + T.
/// Extraction and re-attachment must use the same setting.
struct TransformOptions {
    bool scale_position = false;
};

// Quaternion helpers (Hamilton convention, scalar-first vectors).
Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b);
Eigen::Vector4d quat_conjugate(const Eigen::Vector4d& q);
Eigen::Vector4d quat_normalized(const Eigen::Vector4d& q);
Eigen::Matrix3d quat_to_matrix(const Eigen::Vector4d& q);

/// Rotation matrix -> quaternion, choosing the representative with
/// non-negative scalar part (ties broken toward +x) so round trips are
/// deterministic.
Eigen::Vector4d matrix_to_quat(const Eigen::Matrix3d& R);

/// Frame of triangle `tri`: R columns are (normalized first edge, unit face
/// normal, their cross product), T the vertex centroid, k the mean edge
/// length. Throws DegenerateTriangleError when the area is <= 1e-12.
TriangleFrame triangle_frame(const Mesh& mesh, int tri);

/// All triangle frames in index order.
std::vector<TriangleFrame> build_frames(const Mesh& mesh);

/// s' = k*s, mu' = R*mu + T, r' = quat(R)*r. Opacity, sh and binding pass
/// through untouched.
GaussianComponent local_to_global(const GaussianComponent& g, const TriangleFrame& frame,
                                  const TransformOptions& opts = {});

/// Exact inverse of local_to_global.
GaussianComponent global_to_local(const GaussianComponent& g, const TriangleFrame& frame,
                                  const TransformOptions& opts = {});

/// Transforms every Gaussian by its parent triangle's frame. Builds (and
/// caches) frames when absent. A no-op on avatars already in global space.
Avatar to_global_space(const Avatar& avatar, const TransformOptions& opts = {});

/// Inverse of to_global_space.
Avatar to_local_space(const Avatar& avatar, const TransformOptions& opts = {});

/// Checks bindings, scale positivity, opacity range and quaternion norms.
/// Throws InvalidArgumentError naming the first violation.
void validate_avatar(const Avatar& avatar);

} // namespace splatpart
