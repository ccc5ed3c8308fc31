/* SPDX-License-Identifier: Apache-2.0 */
#include "splatpart/swap.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <unordered_set>

namespace splatpart {

void SegmentArchive::validate() const {
    if (source_triangle_count < 1) {
        throw InvalidArgumentError("segment archive has no source topology");
    }
    if (gaussians.empty()) {
        throw InvalidArgumentError("segment archive holds no gaussians");
    }
    for (std::size_t i = 1; i < triangles.size(); ++i) {
        if (triangles[i] <= triangles[i - 1]) {
            throw InvalidArgumentError("segment archive triangle list must be sorted and unique");
        }
    }
    std::unordered_set<int> allowed(triangles.begin(), triangles.end());
    for (std::size_t i = 0; i < gaussians.size(); ++i) {
        const int b = gaussians[i].binding;
        if (b < 0 || b >= source_triangle_count) {
            throw InvalidArgumentError("segment archive binding out of range at index " +
                                       std::to_string(i));
        }
        if (allowed.find(b) == allowed.end()) {
            throw InvalidArgumentError("segment archive gaussian " + std::to_string(i) +
                                       " bound to a triangle outside the referenced set");
        }
    }
}

void MergeConfig::validate() const {
    if (n < 0) {
        throw InvalidArgumentError("merge threshold n must be >= 0");
    }
    if (o < 0.0 || o > 1.0) {
        throw InvalidArgumentError("merge opacity factor o must be in [0, 1]");
    }
}

SegmentArchive extract_segment(const Avatar& avatar, const Segmentation& seg, int channel,
                               int cluster, const std::string& tag) {
    if (seg.records.size() != avatar.size()) {
        throw InvalidArgumentError("extract_segment: segmentation length does not match avatar");
    }
    if (cluster == kNoiseLabel) {
        throw InvalidArgumentError("extract_segment: cannot extract the noise bucket");
    }

    const Avatar local = to_local_space(avatar);
    SegmentArchive archive;
    archive.source_avatar_id = avatar.id;
    archive.source_triangle_count = static_cast<int>(avatar.mesh.triangle_count());
    archive.tag = tag;
    archive.channel = channel;
    archive.cluster = cluster;

    std::set<int> touched;
    for (std::size_t i = 0; i < seg.records.size(); ++i) {
        if (seg.records[i].channel != channel || seg.records[i].cluster != cluster) {
            continue;
        }
        archive.gaussians.push_back(local.gaussians[i]);
        touched.insert(local.gaussians[i].binding);
    }
    if (archive.gaussians.empty()) {
        throw InvalidArgumentError("extract_segment: channel " + std::to_string(channel) +
                                   " cluster " + std::to_string(cluster) + " is empty");
    }
    archive.triangles.assign(touched.begin(), touched.end());
    return archive;
}

std::map<int, std::vector<std::size_t>> group_by_triangle(
    const std::vector<GaussianComponent>& gaussians) {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < gaussians.size(); ++i) {
        groups[gaussians[i].binding].push_back(i);
    }
    return groups;
}

namespace {

void check_topology(const Avatar& target, const SegmentArchive& part) {
    part.validate();
    if (static_cast<int>(target.mesh.triangle_count()) != part.source_triangle_count) {
        throw TopologyMismatchError(
            "target mesh has " + std::to_string(target.mesh.triangle_count()) +
            " triangles but the part was extracted from a mesh with " +
            std::to_string(part.source_triangle_count));
    }
}

/// Appends the part's local-frame Gaussians, re-expressed in the coordinate
/// space the result avatar is in.
void append_part(Avatar& result, const SegmentArchive& part) {
    if (result.space == CoordinateSpace::Local) {
        result.gaussians.insert(result.gaussians.end(), part.gaussians.begin(),
                                part.gaussians.end());
        return;
    }
    Avatar staging;
    staging.mesh = result.mesh;
    staging.gaussians = part.gaussians;
    staging.space = CoordinateSpace::Local;
    const Avatar in_global = to_global_space(staging);
    result.gaussians.insert(result.gaussians.end(), in_global.gaussians.begin(),
                            in_global.gaussians.end());
}

} // namespace

Avatar merge_replacement(const Avatar& target, const SegmentArchive& part, int n) {
    check_topology(target, part);
    if (n < 0) {
        throw InvalidArgumentError("merge threshold n must be >= 0");
    }

    // Per-triangle part population determines which target triangles clear.
    std::map<int, int> part_counts;
    for (const GaussianComponent& g : part.gaussians) {
        ++part_counts[g.binding];
    }
    std::unordered_set<int> cleared;
    for (const auto& [tri, count] : part_counts) {
        if (count > n) {
            cleared.insert(tri);
        }
    }

    Avatar result = target;
    result.gaussians.clear();
    result.gaussians.reserve(target.size() + part.gaussians.size());
    for (const GaussianComponent& g : target.gaussians) {
        if (cleared.find(g.binding) == cleared.end()) {
            result.gaussians.push_back(g);
        }
    }
    append_part(result, part);
    return result;
}

Avatar merge_overlap(const Avatar& target, const SegmentArchive& part, double o) {
    check_topology(target, part);
    if (o < 0.0 || o > 1.0) {
        throw InvalidArgumentError("merge opacity factor o must be in [0, 1]");
    }

    std::unordered_set<int> touched(part.triangles.begin(), part.triangles.end());
    Avatar result = target;
    for (GaussianComponent& g : result.gaussians) {
        if (touched.find(g.binding) != touched.end()) {
            g.opacity *= o;
        }
    }
    append_part(result, part);
    return result;
}

Avatar merge_segment(const Avatar& target, const SegmentArchive& part, const MergeConfig& config) {
    config.validate();
    return config.strategy == MergeStrategy::Replacement
               ? merge_replacement(target, part, config.n)
               : merge_overlap(target, part, config.o);
}

} // namespace splatpart
