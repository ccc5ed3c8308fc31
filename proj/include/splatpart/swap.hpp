/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <map>
#include <string>
#include <vector>

#include "splatpart/avatar.hpp"
#include "splatpart/cluster.hpp"
#include "splatpart/error.hpp"

namespace splatpart {

/// A reusable part: Gaussians in triangle-local coordinates plus enough
/// provenance to audit where they came from.
struct SegmentArchive {
    std::vector<GaussianComponent> gaussians; // local coordinates
    std::vector<int> triangles;               // sorted unique bindings referenced
    int source_triangle_count = 0;            // topology fingerprint of the source mesh
    std::string source_avatar_id;
    std::string tag; // free-text semantic label, e.g. "beard"
    int channel = 0;
    int cluster = 0;
    DbscanConfig dbscan; // parameters the cluster was produced with

    void validate() const;
};

enum class MergeStrategy { Replacement, Overlap };

struct MergeConfig {
    MergeStrategy strategy = MergeStrategy::Replacement;
    int n = 0;      // replacement threshold: part count > n drops target Gaussians
    double o = 1.0; // overlap opacity factor in [0, 1]

    void validate() const;
};

/// Pulls the Gaussians of one (channel, cluster) out of the avatar and stores
/// them in their parent triangles' local frames. Throws InvalidArgumentError
/// when the selection is empty or the segmentation length does not match.
SegmentArchive extract_segment(const Avatar& avatar, const Segmentation& seg, int channel,
                               int cluster, const std::string& tag);

/// Partition by binding index; keys ascend, values keep input order.
std::map<int, std::vector<std::size_t>> group_by_triangle(
    const std::vector<GaussianComponent>& gaussians);

/// Attaches the part to the target avatar. On each triangle the part touches:
/// if the part has strictly more than n Gaussians there, the target's
/// Gaussians on that triangle are dropped; otherwise both sets are kept.
/// Triangles the part does not touch are untouched. The part's local-frame
/// Gaussians bind to the corresponding target triangles, so their global pose
/// comes from the target's frames. Throws TopologyMismatchError when the
/// target triangle count differs from the part's source.
Avatar merge_replacement(const Avatar& target, const SegmentArchive& part, int n);

/// Keeps every target Gaussian but multiplies opacity by o on the triangles
/// the part touches, then appends the part. Throws TopologyMismatchError on a
/// triangle-count mismatch and InvalidArgumentError when o is outside [0, 1].
Avatar merge_overlap(const Avatar& target, const SegmentArchive& part, double o);

/// Strategy dispatch over the two merge rules.
Avatar merge_segment(const Avatar& target, const SegmentArchive& part, const MergeConfig& config);

} // namespace splatpart
