/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "splatpart/avatar.hpp"
#include "splatpart/error.hpp"

namespace splatpart {

enum class MeshKind { UvSphere, GridPatch };

/// Per-region sampling distribution for Gaussian attributes.
struct AppearanceProfile {
    ShVector base_sh = ShVector::Zero(); // region mean; jitter is zero-mean around it
    double sh_jitter = 0.1;              // uniform +- jitter per coefficient
    double opacity_lo = 0.65;
    double opacity_hi = 0.95;
    double scale_lo = 0.08; // triangle-local units (multiples of mean edge length)
    double scale_hi = 0.22;
};

/// A labeled surface region: triangles whose centroid passes the predicate.
struct RegionSpec {
    int id = 0;
    std::function<bool(const Eigen::Vector3d&)> predicate; // centroid in mesh coordinates
    AppearanceProfile appearance;
};

struct SyntheticSpec {
    MeshKind kind = MeshKind::UvSphere;
    int resolution = 14;  // sphere: latitude stacks (slices = 2x); patch: cells per side
    double extent = 0.02; // sphere radius / patch half-width, mesh units
    std::vector<RegionSpec> regions;
    int gaussians_per_triangle = 4;
    double min_profile_separation = 1.0; // required pairwise L2 distance of base_sh
    std::uint64_t seed = 1;

    /// Checks resolution/extent/region sanity and the pairwise base-sh margin.
    void validate() const;
};

/// Closed UV sphere: `stacks` latitude rows, 2*stacks longitude slices,
/// 2*slices*(stacks-1) triangles.
Mesh make_uv_sphere(int stacks, double radius);

/// Flat square in the xy plane, cells x cells quads split into triangles,
/// spanning [-extent, extent]^2.
Mesh make_grid_patch(int cells, double extent);

struct SyntheticResult {
    Avatar avatar;              // triangle-local coordinates
    std::vector<int> truth;     // region id per Gaussian
    std::vector<int> triangle_regions; // region id per triangle
};

/// Builds the mesh, assigns each triangle to the first region whose predicate
/// accepts its centroid, then samples gaussians_per_triangle Gaussians per
/// triangle: barycentric position with a normal offset within 5% of the mean
/// edge length, appearance from the region profile. Each triangle draws from
/// its own seeded substream, so the output is bit-identical for a given seed
/// regardless of evaluation order. Throws InvalidArgumentError when a
/// triangle matches no region or a region matches no triangle.
SyntheticResult make_synthetic_avatar(const SyntheticSpec& spec);

/// Sphere cut into three latitude bands (cap/band/base) with well-separated
/// colors; the standard end-to-end training fixture.
SyntheticSpec make_three_band_spec();

/// Sphere with one background region plus a single region made of two
/// spatially disconnected caps that share an appearance profile, so channel
/// grouping alone cannot split them but density clustering can. Sized so the
/// default DbscanConfig separates the caps.
SyntheticSpec make_disjoint_subparts_spec();

} // namespace splatpart
