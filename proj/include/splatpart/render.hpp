/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "splatpart/avatar.hpp"
#include "splatpart/error.hpp"

namespace splatpart {

struct Camera {
    Eigen::Vector3d position{0.0, 0.0, 1.0};
    Eigen::Vector3d target{0.0, 0.0, 0.0};
    Eigen::Vector3d up{0.0, 1.0, 0.0};
    double fov_y_deg = 40.0;
    int width = 512;
    int height = 512;

    void validate() const;
};

/// Row-major RGB image with values in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels; // width * height * 3

    Image() = default;
    Image(int w, int h, const Eigen::Vector3d& fill);
    double& at(int x, int y, int c) { return pixels[3 * (static_cast<std::size_t>(y) * width + x) + c]; }
    double at(int x, int y, int c) const {
        return pixels[3 * (static_cast<std::size_t>(y) * width + x) + c];
    }
    Eigen::Vector3d mean_color() const;
};

struct RenderStats {
    std::size_t drawn = 0;
    std::size_t behind_camera = 0;
    std::size_t offscreen = 0;
};

/// Real spherical harmonics up to degree 3 for one RGB triple, evaluated at a
/// unit view direction, including the conventional +0.5 offset on top of the
/// DC term. Result clamped to be non-negative.
Eigen::Vector3d eval_sh(const ShVector& sh, const Eigen::Vector3d& dir, int degree);

/// CPU splat rasterizer: pinhole projection, first-order 2D covariance,
/// 3-sigma footprint truncation, one global back-to-front sort (depth ties
/// broken by Gaussian index), "over" compositing with per-pixel alpha
/// opacity * exp(-d^2/2) clamped to 0.999. Gaussians behind the camera are
/// skipped and counted in stats. The avatar is converted to global space
/// internally when needed.
Image render(const Avatar& avatar, const Camera& camera, int sh_degree,
             RenderStats* stats = nullptr,
             const Eigen::Vector3d& background = Eigen::Vector3d::Zero());

/// Same rasterization but every Gaussian gets a flat categorical color for
/// its label (noise, label < 0, renders gray). Throws InvalidArgumentError on
/// a label-count mismatch.
Image render_segments(const Avatar& avatar, const std::vector<int>& labels, const Camera& camera,
                      RenderStats* stats = nullptr,
                      const Eigen::Vector3d& background = Eigen::Vector3d::Zero());

/// Categorical palette used by render_segments; labels cycle through it.
Eigen::Vector3d palette_color(int label);

/// Frames the avatar's global bounding sphere with a comfortable margin.
Camera auto_camera(const Avatar& avatar, int width, int height);

} // namespace splatpart
