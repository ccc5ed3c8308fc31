/* SPDX-License-Identifier: Apache-2.0 */
#include "splatpart/avatar.hpp"

#include <cmath>

namespace splatpart {

Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
    const double aw = a[0], ax = a[1], ay = a[2], az = a[3];
    const double bw = b[0], bx = b[1], by = b[2], bz = b[3];
    return {aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw};
}

Eigen::Vector4d quat_conjugate(const Eigen::Vector4d& q) {
    return {q[0], -q[1], -q[2], -q[3]};
}

Eigen::Vector4d quat_normalized(const Eigen::Vector4d& q) {
    const double n = q.norm();
    if (n <= 0.0 || !std::isfinite(n)) {
        throw InvalidArgumentError("cannot normalize zero or non-finite quaternion");
    }
    return q / n;
}

Eigen::Matrix3d quat_to_matrix(const Eigen::Vector4d& q) {
    const Eigen::Vector4d u = quat_normalized(q);
    const double w = u[0], x = u[1], y = u[2], z = u[3];
    Eigen::Matrix3d m;
    m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return m;
}

Eigen::Vector4d matrix_to_quat(const Eigen::Matrix3d& m) {
    // Shepperd's method: pick the numerically largest component first.
    Eigen::Vector4d q;
    const double tr = m.trace();
    if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        q << 0.25 * s,
             (m(2, 1) - m(1, 2)) / s,
             (m(0, 2) - m(2, 0)) / s,
             (m(1, 0) - m(0, 1)) / s;
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
        double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
        q << (m(2, 1) - m(1, 2)) / s,
             0.25 * s,
             (m(0, 1) + m(1, 0)) / s,
             (m(0, 2) + m(2, 0)) / s;
    } else if (m(1, 1) > m(2, 2)) {
        double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
        q << (m(0, 2) - m(2, 0)) / s,
             (m(0, 1) + m(1, 0)) / s,
             0.25 * s,
             (m(1, 2) + m(2, 1)) / s;
    } else {
        double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
        q << (m(1, 0) - m(0, 1)) / s,
             (m(0, 2) + m(2, 0)) / s,
             (m(1, 2) + m(2, 1)) / s,
             0.25 * s;
    }
    q.normalize();
    // Canonical representative: non-negative scalar part, ties toward +x.
    if (q[0] < 0.0 || (q[0] == 0.0 && q[1] < 0.0)) {
        q = -q;
    }
    return q;
}

TriangleFrame triangle_frame(const Mesh& mesh, int tri) {
    if (tri < 0 || tri >= mesh.triangle_count()) {
        throw InvalidArgumentError("triangle index " + std::to_string(tri) + " out of range");
    }
    const auto& t = mesh.triangles[tri];
    const Eigen::Vector3d& a = mesh.vertices[t[0]];
    const Eigen::Vector3d& b = mesh.vertices[t[1]];
    const Eigen::Vector3d& c = mesh.vertices[t[2]];

    const Eigen::Vector3d e0 = b - a;
    const Eigen::Vector3d e1 = c - a;
    const Eigen::Vector3d n = e0.cross(e1);
    const double area = 0.5 * n.norm();
    if (area <= 1e-12) {
        throw DegenerateTriangleError("triangle " + std::to_string(tri) +
                                      " is degenerate (area " + std::to_string(area) + ")");
    }

    TriangleFrame f;
    const Eigen::Vector3d tangent = e0.normalized();
    const Eigen::Vector3d normal = n.normalized();
    f.R.col(0) = tangent;
    f.R.col(1) = normal;
    f.R.col(2) = tangent.cross(normal);
    f.T = (a + b + c) / 3.0;
    f.k = (e0.norm() + (c - b).norm() + e1.norm()) / 3.0;
    return f;
}

std::vector<TriangleFrame> build_frames(const Mesh& mesh) {
    std::vector<TriangleFrame> frames;
    frames.reserve(mesh.triangles.size());
    for (int i = 0; i < mesh.triangle_count(); ++i) {
        frames.push_back(triangle_frame(mesh, i));
    }
    return frames;
}

GaussianComponent local_to_global(const GaussianComponent& g, const TriangleFrame& frame,
                                  const TransformOptions& opts) {
    GaussianComponent out = g;
    out.scale = frame.k * g.scale;
    out.mu = frame.R * (opts.scale_position ? (frame.k * g.mu).eval() : g.mu) + frame.T;
    out.rot = quat_normalized(quat_multiply(matrix_to_quat(frame.R), g.rot));
    return out;
}

GaussianComponent global_to_local(const GaussianComponent& g, const TriangleFrame& frame,
                                  const TransformOptions& opts) {
    GaussianComponent out = g;
    out.scale = g.scale / frame.k;
    out.mu = frame.R.transpose() * (g.mu - frame.T);
    if (opts.scale_position) {
        out.mu /= frame.k;
    }
    out.rot = quat_normalized(quat_multiply(quat_conjugate(matrix_to_quat(frame.R)), g.rot));
    return out;
}

namespace {

Avatar transform_space(const Avatar& avatar, CoordinateSpace target, const TransformOptions& opts) {
    Avatar out = avatar;
    if (avatar.space == target) {
        return out;
    }
    if (!out.frame_cache) {
        out.frame_cache = build_frames(out.mesh);
    }
    const auto& frames = *out.frame_cache;
    for (auto& g : out.gaussians) {
        if (g.binding < 0 || g.binding >= static_cast<int>(frames.size())) {
            throw InvalidArgumentError("gaussian binding " + std::to_string(g.binding) +
                                       " exceeds triangle count");
        }
        g = (target == CoordinateSpace::Global) ? local_to_global(g, frames[g.binding], opts)
                                                : global_to_local(g, frames[g.binding], opts);
    }
    out.space = target;
    return out;
}

} // namespace

Avatar to_global_space(const Avatar& avatar, const TransformOptions& opts) {
    return transform_space(avatar, CoordinateSpace::Global, opts);
}

Avatar to_local_space(const Avatar& avatar, const TransformOptions& opts) {
    return transform_space(avatar, CoordinateSpace::Local, opts);
}

void validate_avatar(const Avatar& avatar) {
    const int tri_count = avatar.mesh.triangle_count();
    const int vert_count = static_cast<int>(avatar.mesh.vertices.size());
    for (int i = 0; i < tri_count; ++i) {
        for (int v : avatar.mesh.triangles[i]) {
            if (v < 0 || v >= vert_count) {
                throw InvalidArgumentError("triangle " + std::to_string(i) +
                                           " references vertex " + std::to_string(v));
            }
        }
    }
    if (avatar.frame_cache && static_cast<int>(avatar.frame_cache->size()) != tri_count) {
        throw InvalidArgumentError("frame cache size does not match triangle count");
    }
    for (std::size_t i = 0; i < avatar.gaussians.size(); ++i) {
        const auto& g = avatar.gaussians[i];
        if (g.binding < 0 || g.binding >= tri_count) {
            throw InvalidArgumentError("gaussian " + std::to_string(i) + " has invalid binding " +
                                       std::to_string(g.binding));
        }
        if (!(g.scale.array() > 0.0).all()) {
            throw InvalidArgumentError("gaussian " + std::to_string(i) + " has non-positive scale");
        }
        if (!(g.opacity > 0.0 && g.opacity < 1.0)) {
            throw InvalidArgumentError("gaussian " + std::to_string(i) + " has opacity outside (0,1)");
        }
        if (std::abs(g.rot.norm() - 1.0) > 1e-9) {
            throw InvalidArgumentError("gaussian " + std::to_string(i) + " has non-unit quaternion");
        }
        if (!g.mu.allFinite() || !g.sh.allFinite()) {
            throw InvalidArgumentError("gaussian " + std::to_string(i) + " has non-finite values");
        }
    }
}

} // namespace splatpart
