/* SPDX-License-Identifier: Apache-2.0 */
#include "splatpart/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <unordered_map>

namespace splatpart {

void DbscanConfig::validate() const {
    if (!(eps > 0.0)) {
        throw InvalidArgumentError("dbscan eps must be > 0");
    }
    if (min_samples < 1) {
        throw InvalidArgumentError("dbscan min_samples must be >= 1");
    }
}

namespace {

/// Uniform grid over the point set with cell edge = eps, so a radius query
/// only has to look at the 27 cells around the query point.
class GridIndex {
public:
    GridIndex(const std::vector<Eigen::Vector3d>& points, double eps)
        : points_(points), inv_cell_(1.0 / eps) {
        cells_.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            cells_[key(points[i])].push_back(i);
        }
    }

    /// All indices within eps of points[q], inclusive, ascending.
    std::vector<std::size_t> query(std::size_t q, double eps) const {
        const Eigen::Vector3d& p = points_[q];
        const double eps2 = eps * eps;
        std::vector<std::size_t> out;
        const std::int64_t cx = coord(p.x());
        const std::int64_t cy = coord(p.y());
        const std::int64_t cz = coord(p.z());
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    const auto it = cells_.find(pack(cx + dx, cy + dy, cz + dz));
                    if (it == cells_.end()) {
                        continue;
                    }
                    for (std::size_t j : it->second) {
                        if ((points_[j] - p).squaredNorm() <= eps2) {
                            out.push_back(j);
                        }
                    }
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::int64_t coord(double v) const {
        return static_cast<std::int64_t>(std::floor(v * inv_cell_));
    }

    static std::uint64_t pack(std::int64_t x, std::int64_t y, std::int64_t z) {
        // 21 bits per axis, offset to keep the packed key collision-free for
        // any realistic mesh extent.
        const std::uint64_t bias = 1u << 20;
        return ((static_cast<std::uint64_t>(x + static_cast<std::int64_t>(bias)) & 0x1FFFFF) << 42) |
               ((static_cast<std::uint64_t>(y + static_cast<std::int64_t>(bias)) & 0x1FFFFF) << 21) |
               (static_cast<std::uint64_t>(z + static_cast<std::int64_t>(bias)) & 0x1FFFFF);
    }

    std::uint64_t key(const Eigen::Vector3d& p) const {
        return pack(coord(p.x()), coord(p.y()), coord(p.z()));
    }

    const std::vector<Eigen::Vector3d>& points_;
    double inv_cell_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

constexpr int kUnvisited = -2;

} // namespace

std::vector<int> dbscan(const std::vector<Eigen::Vector3d>& points, const DbscanConfig& config) {
    config.validate();
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].allFinite()) {
            throw InvalidArgumentError("dbscan: non-finite point at index " + std::to_string(i));
        }
    }

    const std::size_t n = points.size();
    std::vector<int> labels(n, kUnvisited);
    if (n == 0) {
        return labels;
    }

    const GridIndex index(points, config.eps);
    const std::size_t min_samples = static_cast<std::size_t>(config.min_samples);
    int next_cluster = 0;

    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != kUnvisited) {
            continue;
        }
        std::vector<std::size_t> seeds = index.query(i, config.eps);
        if (seeds.size() < min_samples) {
            labels[i] = kNoiseLabel;
            continue;
        }
        const int cluster = next_cluster++;
        labels[i] = cluster;
        std::deque<std::size_t> frontier(seeds.begin(), seeds.end());
        while (!frontier.empty()) {
            const std::size_t j = frontier.front();
            frontier.pop_front();
            if (labels[j] == kNoiseLabel) {
                labels[j] = cluster; // border point, claimed by first reacher
                continue;
            }
            if (labels[j] != kUnvisited) {
                continue;
            }
            labels[j] = cluster;
            std::vector<std::size_t> reach = index.query(j, config.eps);
            if (reach.size() >= min_samples) {
                frontier.insert(frontier.end(), reach.begin(), reach.end());
            }
        }
    }
    return labels;
}

Segmentation refine_segments(const Avatar& avatar, const std::vector<int>& channel_labels,
                             const std::vector<DbscanConfig>& configs) {
    if (channel_labels.size() != avatar.size()) {
        throw InvalidArgumentError("refine_segments: label count does not match Gaussian count");
    }
    const int channel_count = static_cast<int>(configs.size());
    for (std::size_t i = 0; i < channel_labels.size(); ++i) {
        if (channel_labels[i] < 0 || channel_labels[i] >= channel_count) {
            throw InvalidArgumentError("refine_segments: channel label out of range at index " +
                                       std::to_string(i));
        }
    }

    const Avatar global = to_global_space(avatar);
    Segmentation seg;
    seg.avatar_id = avatar.id;
    seg.channel_count = channel_count;
    seg.records.resize(channel_labels.size());

    for (int c = 0; c < channel_count; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < channel_labels.size(); ++i) {
            if (channel_labels[i] == c) {
                members.push_back(i);
            }
        }
        std::vector<Eigen::Vector3d> positions;
        positions.reserve(members.size());
        for (std::size_t idx : members) {
            positions.push_back(global.gaussians[idx].mu);
        }
        const std::vector<int> clusters = dbscan(positions, configs[static_cast<std::size_t>(c)]);
        for (std::size_t m = 0; m < members.size(); ++m) {
            seg.records[members[m]] = {c, clusters[m]};
        }
    }
    return seg;
}

Segmentation refine_segments(const Avatar& avatar, const std::vector<int>& channel_labels,
                             const DbscanConfig& config) {
    int channel_count = 0;
    for (int label : channel_labels) {
        channel_count = std::max(channel_count, label + 1);
    }
    return refine_segments(avatar, channel_labels,
                           std::vector<DbscanConfig>(static_cast<std::size_t>(channel_count), config));
}

std::vector<int> flatten_segmentation(const Segmentation& seg) {
    // Assign each observed (channel, cluster) pair a dense id in first-seen
    // order so downstream metrics treat the refined partition as flat labels.
    std::map<std::pair<int, int>, int> ids;
    std::vector<int> out(seg.records.size(), kNoiseLabel);
    for (std::size_t i = 0; i < seg.records.size(); ++i) {
        const SegmentRecord& r = seg.records[i];
        if (r.cluster == kNoiseLabel) {
            continue;
        }
        const auto key = std::make_pair(r.channel, r.cluster);
        const auto it = ids.find(key);
        if (it == ids.end()) {
            const int id = static_cast<int>(ids.size());
            ids.emplace(key, id);
            out[i] = id;
        } else {
            out[i] = it->second;
        }
    }
    return out;
}

namespace {

double choose2(double m) { return m * (m - 1.0) / 2.0; }

/// Remaps arbitrary labels to dense 0..K-1, giving each noise point (< 0) its
/// own fresh class when expand_noise is set.
std::vector<int> densify(const std::vector<int>& labels, bool expand_noise, int* count) {
    std::unordered_map<int, int> remap;
    std::vector<int> out(labels.size());
    int next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (expand_noise && labels[i] < 0) {
            out[i] = next++;
            continue;
        }
        const auto it = remap.find(labels[i]);
        if (it == remap.end()) {
            remap.emplace(labels[i], next);
            out[i] = next++;
        } else {
            out[i] = it->second;
        }
    }
    *count = next;
    return out;
}

} // namespace

ClusterMetrics segmentation_metrics(const std::vector<int>& predicted,
                                    const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) {
        throw InvalidArgumentError("segmentation_metrics: length mismatch");
    }
    if (predicted.empty()) {
        throw InvalidArgumentError("segmentation_metrics: empty input");
    }
    const double n = static_cast<double>(predicted.size());

    int pred_count = 0;
    int truth_count = 0;
    const std::vector<int> p = densify(predicted, /*expand_noise=*/true, &pred_count);
    const std::vector<int> t = densify(truth, /*expand_noise=*/false, &truth_count);

    // Contingency table.
    std::map<std::pair<int, int>, double> table;
    std::vector<double> row(static_cast<std::size_t>(pred_count), 0.0);
    std::vector<double> col(static_cast<std::size_t>(truth_count), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        table[{p[i], t[i]}] += 1.0;
        row[static_cast<std::size_t>(p[i])] += 1.0;
        col[static_cast<std::size_t>(t[i])] += 1.0;
    }

    ClusterMetrics m;

    // Adjusted Rand index.
    double sum_cells = 0.0;
    for (const auto& [key, count] : table) {
        sum_cells += choose2(count);
    }
    double sum_rows = 0.0;
    for (double a : row) {
        sum_rows += choose2(a);
    }
    double sum_cols = 0.0;
    for (double b : col) {
        sum_cols += choose2(b);
    }
    const double expected = sum_rows * sum_cols / choose2(n);
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum - expected == 0.0) {
        m.ari = sum_cells - expected == 0.0 ? 1.0 : 0.0;
    } else {
        m.ari = (sum_cells - expected) / (maximum - expected);
    }

    // Normalized mutual information, arithmetic-mean normalizer.
    double mi = 0.0;
    for (const auto& [key, count] : table) {
        const double pij = count / n;
        const double pi = row[static_cast<std::size_t>(key.first)] / n;
        const double pj = col[static_cast<std::size_t>(key.second)] / n;
        mi += pij * std::log(pij / (pi * pj));
    }
    double h_pred = 0.0;
    for (double a : row) {
        const double q = a / n;
        if (q > 0.0) {
            h_pred -= q * std::log(q);
        }
    }
    double h_truth = 0.0;
    for (double b : col) {
        const double q = b / n;
        if (q > 0.0) {
            h_truth -= q * std::log(q);
        }
    }
    if (pred_count == 1 && truth_count == 1) {
        m.nmi = 1.0;
    } else {
        const double normalizer = std::max(0.5 * (h_pred + h_truth), 1e-15);
        m.nmi = std::max(0.0, mi) / normalizer;
    }

    // Purity over non-noise predictions.
    std::unordered_map<int, std::unordered_map<int, double>> overlap;
    double kept = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] < 0) {
            continue;
        }
        overlap[predicted[i]][t[i]] += 1.0;
        kept += 1.0;
    }
    if (kept == 0.0) {
        m.purity = 0.0;
    } else {
        double agree = 0.0;
        for (const auto& [cluster, counts] : overlap) {
            double best = 0.0;
            for (const auto& [cls, count] : counts) {
                best = std::max(best, count);
            }
            agree += best;
        }
        m.purity = agree / kept;
    }
    return m;
}

} // namespace splatpart
