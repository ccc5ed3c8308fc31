/* SPDX-License-Identifier: Apache-2.0 */
#include "splatpart/render.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numbers>

namespace splatpart {

void Camera::validate() const {
    if (!(fov_y_deg > 0.0) || !(fov_y_deg < 180.0)) {
        throw InvalidArgumentError("camera fov must be in (0, 180) degrees");
    }
    if (width < 1 || height < 1) {
        throw InvalidArgumentError("camera image size must be positive");
    }
    const Eigen::Vector3d forward = target - position;
    if (forward.norm() < 1e-12) {
        throw InvalidArgumentError("camera position and target coincide");
    }
    if (forward.normalized().cross(up.normalized()).norm() < 1e-9) {
        throw InvalidArgumentError("camera look direction and up vector are collinear");
    }
}

Image::Image(int w, int h, const Eigen::Vector3d& fill) : width(w), height(h) {
    pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                at(x, y, c) = fill[c];
            }
        }
    }
}

Eigen::Vector3d Image::mean_color() const {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    const std::size_t n = static_cast<std::size_t>(width) * height;
    for (std::size_t i = 0; i < n; ++i) {
        sum.x() += pixels[3 * i];
        sum.y() += pixels[3 * i + 1];
        sum.z() += pixels[3 * i + 2];
    }
    return n == 0 ? sum : Eigen::Vector3d(sum / static_cast<double>(n));
}

namespace {

// Real spherical-harmonics basis constants, degree 0..3.
constexpr double kSh0 = 0.28209479177387814;
constexpr double kSh1 = 0.4886025119029199;
constexpr double kSh2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                            -1.0925484305920792, 0.5462742152960396};
constexpr double kSh3[7] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                            0.3731763325901154, -0.4570457994644658, 1.445305721320277,
                            -0.5900435899266435};

double eval_sh_channel(const double* c, const Eigen::Vector3d& d, int degree) {
    double v = kSh0 * c[0];
    if (degree < 1) {
        return v;
    }
    const double x = d.x(), y = d.y(), z = d.z();
    v += -kSh1 * y * c[1] + kSh1 * z * c[2] - kSh1 * x * c[3];
    if (degree < 2) {
        return v;
    }
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, yz = y * z, xz = x * z;
    v += kSh2[0] * xy * c[4] + kSh2[1] * yz * c[5] + kSh2[2] * (2.0 * zz - xx - yy) * c[6] +
         kSh2[3] * xz * c[7] + kSh2[4] * (xx - yy) * c[8];
    if (degree < 3) {
        return v;
    }
    v += kSh3[0] * y * (3.0 * xx - yy) * c[9] + kSh3[1] * xy * z * c[10] +
         kSh3[2] * y * (4.0 * zz - xx - yy) * c[11] +
         kSh3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * c[12] +
         kSh3[4] * x * (4.0 * zz - xx - yy) * c[13] + kSh3[5] * z * (xx - yy) * c[14] +
         kSh3[6] * x * (xx - 3.0 * yy) * c[15];
    return v;
}

struct ViewBasis {
    Eigen::Matrix3d rot; // world -> camera rotation (rows: right, down, forward)
    Eigen::Vector3d origin;
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
};

ViewBasis make_view(const Camera& cam) {
    ViewBasis v;
    const Eigen::Vector3d forward = (cam.target - cam.position).normalized();
    const Eigen::Vector3d right = forward.cross(cam.up.normalized()).normalized();
    const Eigen::Vector3d down = forward.cross(right);
    v.rot.row(0) = right;
    v.rot.row(1) = down;
    v.rot.row(2) = forward;
    v.origin = cam.position;
    const double fov = cam.fov_y_deg * std::numbers::pi / 180.0;
    v.fy = 0.5 * cam.height / std::tan(0.5 * fov);
    v.fx = v.fy;
    v.cx = 0.5 * cam.width;
    v.cy = 0.5 * cam.height;
    return v;
}

struct Splat {
    double depth = 0.0;
    std::size_t index = 0;
    double u = 0.0, v = 0.0;        // projected center, pixels
    Eigen::Matrix2d inv_cov;        // footprint metric
    double radius = 0.0;            // 3-sigma bound, pixels
    Eigen::Vector3d color;
    double opacity = 0.0;
};

/// Shared rasterization core; `color_of` supplies the per-Gaussian color.
template <typename ColorFn>
Image rasterize(const Avatar& avatar, const Camera& camera, ColorFn&& color_of,
                RenderStats* stats, const Eigen::Vector3d& background) {
    camera.validate();
    const Avatar global = to_global_space(avatar);
    const ViewBasis view = make_view(camera);

    RenderStats local_stats;
    std::vector<Splat> splats;
    splats.reserve(global.size());

    for (std::size_t i = 0; i < global.size(); ++i) {
        const GaussianComponent& g = global.gaussians[i];
        const Eigen::Vector3d pc = view.rot * (g.mu - view.origin);
        if (pc.z() <= 1e-9) {
            ++local_stats.behind_camera;
            continue;
        }

        Splat s;
        s.index = i;
        s.depth = pc.z();
        s.u = view.fx * pc.x() / pc.z() + view.cx;
        s.v = view.fy * pc.y() / pc.z() + view.cy;

        // 3D covariance in camera coordinates.
        const Eigen::Matrix3d rot = quat_to_matrix(quat_normalized(g.rot));
        const Eigen::Matrix3d rs = rot * g.scale.asDiagonal();
        const Eigen::Matrix3d cov_world = rs * rs.transpose();
        const Eigen::Matrix3d cov_cam = view.rot * cov_world * view.rot.transpose();

        // First-order projection to the image plane.
        const double iz = 1.0 / pc.z();
        Eigen::Matrix<double, 2, 3> jac;
        jac << view.fx * iz, 0.0, -view.fx * pc.x() * iz * iz,
               0.0, view.fy * iz, -view.fy * pc.y() * iz * iz;
        Eigen::Matrix2d cov2 = jac * cov_cam * jac.transpose();
        // Slight isotropic dilation keeps sub-pixel splats visible.
        cov2(0, 0) += 0.3;
        cov2(1, 1) += 0.3;

        const double det = cov2.determinant();
        if (!(det > 0.0) || !cov2.allFinite()) {
            ++local_stats.offscreen;
            continue;
        }
        s.inv_cov = cov2.inverse();
        const double mid = 0.5 * (cov2(0, 0) + cov2(1, 1));
        const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
        s.radius = 3.0 * std::sqrt(lambda_max);

        if (s.u + s.radius < 0.0 || s.u - s.radius > camera.width || s.v + s.radius < 0.0 ||
            s.v - s.radius > camera.height) {
            ++local_stats.offscreen;
            continue;
        }

        s.color = color_of(i, g, (g.mu - view.origin).normalized());
        s.opacity = std::clamp(g.opacity, 0.0, 1.0);
        splats.push_back(s);
    }

    // Back-to-front; ties resolved by index so the composite is reproducible.
    std::sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) {
        if (a.depth != b.depth) {
            return a.depth > b.depth;
        }
        return a.index < b.index;
    });

    Image img(camera.width, camera.height, background);
    for (const Splat& s : splats) {
        const int x0 = std::max(0, static_cast<int>(std::floor(s.u - s.radius)));
        const int x1 = std::min(camera.width - 1, static_cast<int>(std::ceil(s.u + s.radius)));
        const int y0 = std::max(0, static_cast<int>(std::floor(s.v - s.radius)));
        const int y1 = std::min(camera.height - 1, static_cast<int>(std::ceil(s.v + s.radius)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Eigen::Vector2d d(x + 0.5 - s.u, y + 0.5 - s.v);
                const double md2 = d.dot(s.inv_cov * d);
                if (md2 > 9.0) { // 3-sigma truncation
                    continue;
                }
                const double alpha = std::min(0.999, s.opacity * std::exp(-0.5 * md2));
                if (alpha < 1.0 / 255.0) {
                    continue;
                }
                for (int c = 0; c < 3; ++c) {
                    double& px = img.at(x, y, c);
                    px = alpha * s.color[c] + (1.0 - alpha) * px;
                }
            }
        }
        ++local_stats.drawn;
    }

    for (double& p : img.pixels) {
        p = std::clamp(p, 0.0, 1.0);
    }
    if (stats) {
        *stats = local_stats;
    }
    return img;
}

} // namespace

Eigen::Vector3d eval_sh(const ShVector& sh, const Eigen::Vector3d& dir, int degree) {
    if (degree < 0 || degree > 3) {
        throw InvalidArgumentError("sh degree must be in [0, 3]");
    }
    Eigen::Vector3d rgb;
    for (int c = 0; c < 3; ++c) {
        rgb[c] = eval_sh_channel(sh.data() + c * kShCoeffs, dir, degree) + 0.5;
    }
    return rgb.cwiseMax(0.0);
}

Image render(const Avatar& avatar, const Camera& camera, int sh_degree, RenderStats* stats,
             const Eigen::Vector3d& background) {
    if (sh_degree < 0 || sh_degree > 3) {
        throw InvalidArgumentError("sh degree must be in [0, 3]");
    }
    return rasterize(
        avatar, camera,
        [sh_degree](std::size_t, const GaussianComponent& g, const Eigen::Vector3d& dir) {
            return eval_sh(g.sh, dir, sh_degree);
        },
        stats, background);
}

Eigen::Vector3d palette_color(int label) {
    static const Eigen::Vector3d kPalette[] = {
        {0.894, 0.102, 0.110}, {0.216, 0.494, 0.722}, {0.302, 0.686, 0.290},
        {0.596, 0.306, 0.639}, {1.000, 0.498, 0.000}, {1.000, 0.929, 0.435},
        {0.651, 0.337, 0.157}, {0.969, 0.506, 0.749}, {0.400, 0.761, 0.647},
        {0.988, 0.553, 0.384}, {0.553, 0.627, 0.796}, {0.906, 0.541, 0.765},
    };
    constexpr int n = static_cast<int>(std::size(kPalette));
    if (label < 0) {
        return {0.5, 0.5, 0.5}; // noise
    }
    return kPalette[label % n];
}

Image render_segments(const Avatar& avatar, const std::vector<int>& labels, const Camera& camera,
                      RenderStats* stats, const Eigen::Vector3d& background) {
    if (labels.size() != avatar.size()) {
        throw InvalidArgumentError("render_segments: label count does not match avatar");
    }
    return rasterize(
        avatar, camera,
        [&labels](std::size_t i, const GaussianComponent&, const Eigen::Vector3d&) {
            return palette_color(labels[i]);
        },
        stats, background);
}

Camera auto_camera(const Avatar& avatar, int width, int height) {
    const Avatar global = to_global_space(avatar);
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::max());
    Eigen::Vector3d hi = Eigen::Vector3d::Constant(std::numeric_limits<double>::lowest());
    for (const GaussianComponent& g : global.gaussians) {
        lo = lo.cwiseMin(g.mu);
        hi = hi.cwiseMax(g.mu);
    }
    Camera cam;
    cam.width = width;
    cam.height = height;
    if (global.gaussians.empty()) {
        return cam;
    }
    const Eigen::Vector3d center = 0.5 * (lo + hi);
    const double radius = std::max(1e-6, 0.5 * (hi - lo).norm());
    const double fov = cam.fov_y_deg * std::numbers::pi / 180.0;
    const double distance = 1.6 * radius / std::tan(0.5 * fov);
    const Eigen::Vector3d dir = Eigen::Vector3d(0.35, -0.45, 0.82).normalized();
    cam.target = center;
    cam.position = center + distance * dir;
    cam.up = Eigen::Vector3d(0.0, 0.0, 1.0);
    return cam;
}

} // namespace splatpart
