/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "splatpart/avatar.hpp"
#include "splatpart/error.hpp"

namespace splatpart {

/// Label value marking a point that belongs to no cluster.
inline constexpr int kNoiseLabel = -1;

struct DbscanConfig {
    double eps = 0.005; // neighborhood radius, mesh units
    int min_samples = 100;

    void validate() const;
};

/// Density-based clustering with Euclidean metric. A point is core iff it has
/// at least min_samples neighbors within eps, where the radius test is
/// inclusive (distance <= eps) and the point counts itself. Clusters are the
/// connected components of core points plus density-reachable border points;
/// a border point reachable from several clusters goes to the cluster whose
/// expansion reaches it first in index order, so the labeling is a pure
/// function of the input order. Returns one label per point, kNoiseLabel for
/// noise, cluster ids contiguous from 0. Neighbor queries run on a uniform
/// grid but match exhaustive search exactly.
std::vector<int> dbscan(const std::vector<Eigen::Vector3d>& points, const DbscanConfig& config);

/// One Gaussian's place in the refined partition.
struct SegmentRecord {
    int channel = 0;          // bottleneck channel in [0, k)
    int cluster = kNoiseLabel; // cluster id local to the channel, or noise
};

struct Segmentation {
    std::string avatar_id;
    int channel_count = 0;
    std::vector<SegmentRecord> records; // one per Gaussian, input order

    std::size_t size() const { return records.size(); }
};

/// Runs dbscan independently inside each channel on the global-space Gaussian
/// positions. channel_labels holds one value in [0, channel_count) per
/// Gaussian; configs has one entry per channel (or use the single-config
/// overload). Channels with no members simply produce no clusters.
Segmentation refine_segments(const Avatar& avatar, const std::vector<int>& channel_labels,
                             const std::vector<DbscanConfig>& configs);
Segmentation refine_segments(const Avatar& avatar, const std::vector<int>& channel_labels,
                             const DbscanConfig& config);

/// Collapses (channel, cluster) pairs into one flat label per Gaussian so the
/// refined partition can be scored like any labeling. Noise stays kNoiseLabel.
std::vector<int> flatten_segmentation(const Segmentation& seg);

struct ClusterMetrics {
    double ari = 0.0;
    double nmi = 0.0;
    double purity = 0.0;
};

/// Adjusted Rand index, normalized mutual information (arithmetic-mean
/// normalization), and purity of `predicted` against `truth`. Noise points
/// (label < 0) in `predicted` count as their own singleton class for ARI and
/// NMI and are excluded from purity; purity of an all-noise prediction is 0.
/// Throws InvalidArgumentError on length mismatch or empty input.
ClusterMetrics segmentation_metrics(const std::vector<int>& predicted,
                                    const std::vector<int>& truth);

} // namespace splatpart
