/* SPDX-License-Identifier: Apache-2.0 */
#include "splatpart/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "splatpart/rng.hpp"

namespace splatpart {

void SyntheticSpec::validate() const {
    if (resolution < 3) {
        throw InvalidArgumentError("synthetic resolution must be >= 3");
    }
    if (!(extent > 0.0)) {
        throw InvalidArgumentError("synthetic extent must be > 0");
    }
    if (gaussians_per_triangle < 1) {
        throw InvalidArgumentError("gaussians_per_triangle must be >= 1");
    }
    if (regions.empty()) {
        throw InvalidArgumentError("synthetic spec has no regions");
    }
    for (const RegionSpec& r : regions) {
        if (!r.predicate) {
            throw InvalidArgumentError("region " + std::to_string(r.id) + " has no predicate");
        }
        if (r.appearance.sh_jitter < 0.0 || r.appearance.opacity_lo > r.appearance.opacity_hi ||
            r.appearance.scale_lo > r.appearance.scale_hi || r.appearance.scale_lo <= 0.0 ||
            r.appearance.opacity_lo < 0.0 || r.appearance.opacity_hi > 1.0) {
            throw InvalidArgumentError("region " + std::to_string(r.id) +
                                       " has an invalid appearance profile");
        }
    }
    for (std::size_t a = 0; a < regions.size(); ++a) {
        for (std::size_t b = a + 1; b < regions.size(); ++b) {
            const double d = (regions[a].appearance.base_sh - regions[b].appearance.base_sh).norm();
            if (d < min_profile_separation) {
                throw InvalidArgumentError(
                    "regions " + std::to_string(regions[a].id) + " and " +
                    std::to_string(regions[b].id) + " are separated by " + std::to_string(d) +
                    ", below the required margin");
            }
        }
    }
}

Mesh make_uv_sphere(int stacks, double radius) {
    if (stacks < 3) {
        throw InvalidArgumentError("uv sphere needs at least 3 stacks");
    }
    const int slices = 2 * stacks;
    Mesh mesh;

    mesh.vertices.emplace_back(0.0, 0.0, radius); // north pole
    for (int i = 1; i < stacks; ++i) {
        const double phi = std::numbers::pi * i / stacks; // polar angle from +z
        for (int j = 0; j < slices; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / slices;
            mesh.vertices.emplace_back(radius * std::sin(phi) * std::cos(theta),
                                       radius * std::sin(phi) * std::sin(theta),
                                       radius * std::cos(phi));
        }
    }
    mesh.vertices.emplace_back(0.0, 0.0, -radius); // south pole

    const auto ring = [slices](int i, int j) { return 1 + (i - 1) * slices + (j % slices); };

    for (int j = 0; j < slices; ++j) { // north fan
        mesh.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
    }
    for (int i = 1; i < stacks - 1; ++i) { // quad strips
        for (int j = 0; j < slices; ++j) {
            mesh.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
            mesh.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
        }
    }
    const int south = static_cast<int>(mesh.vertices.size()) - 1;
    for (int j = 0; j < slices; ++j) { // south fan
        mesh.triangles.push_back({south, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
    }
    return mesh;
}

Mesh make_grid_patch(int cells, double extent) {
    if (cells < 1) {
        throw InvalidArgumentError("grid patch needs at least 1 cell");
    }
    Mesh mesh;
    const int side = cells + 1;
    for (int iy = 0; iy < side; ++iy) {
        for (int ix = 0; ix < side; ++ix) {
            mesh.vertices.emplace_back(-extent + 2.0 * extent * ix / cells,
                                       -extent + 2.0 * extent * iy / cells, 0.0);
        }
    }
    const auto vid = [side](int ix, int iy) { return iy * side + ix; };
    for (int iy = 0; iy < cells; ++iy) {
        for (int ix = 0; ix < cells; ++ix) {
            mesh.triangles.push_back({vid(ix, iy), vid(ix + 1, iy), vid(ix + 1, iy + 1)});
            mesh.triangles.push_back({vid(ix, iy), vid(ix + 1, iy + 1), vid(ix, iy + 1)});
        }
    }
    return mesh;
}

SyntheticResult make_synthetic_avatar(const SyntheticSpec& spec) {
    spec.validate();

    SyntheticResult result;
    Mesh& mesh = result.avatar.mesh;
    switch (spec.kind) {
        case MeshKind::UvSphere:
            mesh = make_uv_sphere(spec.resolution, spec.extent);
            break;
        case MeshKind::GridPatch:
            mesh = make_grid_patch(spec.resolution, spec.extent);
            break;
    }

    // Triangle -> region via first matching predicate on the centroid.
    const std::size_t tri_count = mesh.triangle_count();
    result.triangle_regions.resize(tri_count, -1);
    std::vector<std::size_t> region_population(spec.regions.size(), 0);
    for (std::size_t t = 0; t < tri_count; ++t) {
        const auto& tri = mesh.triangles[t];
        const Eigen::Vector3d centroid =
            (mesh.vertices[static_cast<std::size_t>(tri[0])] +
             mesh.vertices[static_cast<std::size_t>(tri[1])] +
             mesh.vertices[static_cast<std::size_t>(tri[2])]) /
            3.0;
        bool matched = false;
        for (std::size_t r = 0; r < spec.regions.size(); ++r) {
            if (spec.regions[r].predicate(centroid)) {
                result.triangle_regions[t] = spec.regions[r].id;
                ++region_population[r];
                matched = true;
                break;
            }
        }
        if (!matched) {
            throw InvalidArgumentError("triangle " + std::to_string(t) +
                                       " matches no region predicate");
        }
    }
    for (std::size_t r = 0; r < spec.regions.size(); ++r) {
        if (region_population[r] == 0) {
            throw InvalidArgumentError("region " + std::to_string(spec.regions[r].id) +
                                       " matches no triangle");
        }
    }

    result.avatar.space = CoordinateSpace::Local;
    result.avatar.id = "synthetic-" + std::to_string(spec.seed);
    result.avatar.gaussians.reserve(tri_count * static_cast<std::size_t>(spec.gaussians_per_triangle));
    result.truth.reserve(result.avatar.gaussians.capacity());

    for (std::size_t t = 0; t < tri_count; ++t) {
        // Independent substream per triangle keeps generation order-free.
        Rng rng(spec.seed + 0x9E3779B97F4A7C15ULL * (t + 1));
        const TriangleFrame frame = triangle_frame(mesh, t);
        const auto& tri = mesh.triangles[t];
        const Eigen::Vector3d& a = mesh.vertices[static_cast<std::size_t>(tri[0])];
        const Eigen::Vector3d& b = mesh.vertices[static_cast<std::size_t>(tri[1])];
        const Eigen::Vector3d& c = mesh.vertices[static_cast<std::size_t>(tri[2])];
        const Eigen::Vector3d normal = frame.R.col(1);

        const RegionSpec* region = nullptr;
        for (const RegionSpec& r : spec.regions) {
            if (r.id == result.triangle_regions[t]) {
                region = &r;
                break;
            }
        }
        const AppearanceProfile& ap = region->appearance;

        for (int gidx = 0; gidx < spec.gaussians_per_triangle; ++gidx) {
            double u = rng.uniform();
            double v = rng.uniform();
            if (u + v > 1.0) { // fold back into the triangle
                u = 1.0 - u;
                v = 1.0 - v;
            }
            const double offset = rng.uniform(-0.05, 0.05) * frame.k;
            const Eigen::Vector3d world = a + u * (b - a) + v * (c - a) + offset * normal;

            GaussianComponent g;
            g.binding = static_cast<int>(t);
            g.mu = frame.R.transpose() * (world - frame.T);

            Eigen::Vector4d q;
            for (int i = 0; i < 4; ++i) {
                q[i] = rng.normal();
            }
            g.rot = quat_normalized(q);
            if (g.rot[0] < 0.0) {
                g.rot = -g.rot;
            }
            for (int i = 0; i < 3; ++i) {
                g.scale[i] = rng.uniform(ap.scale_lo, ap.scale_hi);
            }
            g.opacity = rng.uniform(ap.opacity_lo, ap.opacity_hi);
            for (int i = 0; i < kShDim; ++i) {
                g.sh[i] = ap.base_sh[i] + rng.uniform(-ap.sh_jitter, ap.sh_jitter);
            }
            result.avatar.gaussians.push_back(g);
            result.truth.push_back(result.triangle_regions[t]);
        }
    }
    return result;
}

namespace {

ShVector dc_profile(double r, double g, double b) {
    ShVector sh = ShVector::Zero();
    // Channel-major layout: coefficient 0 of each color channel.
    sh[0] = r;
    sh[kShCoeffs] = g;
    sh[2 * kShCoeffs] = b;
    return sh;
}

} // namespace

SyntheticSpec make_three_band_spec() {
    SyntheticSpec spec;
    spec.kind = MeshKind::UvSphere;
    spec.resolution = 14;
    spec.extent = 0.02;
    spec.gaussians_per_triangle = 4;
    spec.seed = 1;

    const double cut = 0.35 * spec.extent;
    RegionSpec cap;
    cap.id = 0;
    cap.predicate = [cut](const Eigen::Vector3d& p) { return p.z() > cut; };
    cap.appearance.base_sh = dc_profile(1.5, -0.9, -0.9);

    RegionSpec band;
    band.id = 1;
    band.predicate = [cut](const Eigen::Vector3d& p) { return p.z() >= -cut && p.z() <= cut; };
    band.appearance.base_sh = dc_profile(-0.9, 1.5, -0.9);

    RegionSpec base;
    base.id = 2;
    base.predicate = [](const Eigen::Vector3d&) { return true; };
    base.appearance.base_sh = dc_profile(-0.9, -0.9, 1.5);

    spec.regions = {cap, band, base};
    return spec;
}

SyntheticSpec make_disjoint_subparts_spec() {
    SyntheticSpec spec;
    spec.kind = MeshKind::UvSphere;
    spec.resolution = 14;
    spec.extent = 0.02;
    // Dense enough that the default DbscanConfig (eps 0.005, min_samples 100)
    // finds each cap as one solid cluster: measured eps-disk occupancy at this
    // density is ~215 in the cap interior and ~120 at the 5th percentile, so
    // interior points are cores and the rim joins as border points.
    spec.gaussians_per_triangle = 30;
    spec.seed = 1;

    const double cos_cap = 0.8; // half-angle ~36.9 deg; caps stay ~6 eps apart
    RegionSpec caps;
    caps.id = 1;
    caps.predicate = [cos_cap](const Eigen::Vector3d& p) {
        const double nx = p.x() / p.norm();
        return nx > cos_cap || nx < -cos_cap;
    };
    caps.appearance.base_sh = dc_profile(1.8, -0.9, -1.2);

    RegionSpec background;
    background.id = 0;
    background.predicate = [](const Eigen::Vector3d&) { return true; };
    background.appearance.base_sh = dc_profile(-1.2, -0.6, 1.8);

    spec.regions = {caps, background};
    return spec;
}

} // namespace splatpart
