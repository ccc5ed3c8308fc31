/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "splatpart/error.hpp"
#include "splatpart/rng.hpp"

namespace splatpart {

/// Multiresolution spatial-hash encoding h: [0,1]^3 -> R^{F*L}.
struct HashGridConfig {
    int levels = 16;                 // L
    int features_per_level = 2;      // F
    std::uint32_t table_size = 1u << 19; // slots per level, power of two
    int base_resolution = 16;
    double growth_factor = 0.0;      // <= 0 means: derive so the finest level is 2048

    int output_dim() const { return levels * features_per_level; }
    /// Growth factor actually in effect (resolves the derived default).
    double effective_growth() const;
    /// Lattice resolution of one level: floor(base * growth^level).
    std::uint32_t level_resolution(int level) const;
    void validate() const;
};

struct HashGridState {
    HashGridConfig config;
    // One table per level, table_size * F values, slot-major.
    std::vector<std::vector<double>> embeddings;
};

/// Affine map taking raw points into the unit cube and back.
struct BoundingTransform {
    Eigen::Vector3d lo = Eigen::Vector3d::Zero();     // extent minimum
    Eigen::Vector3d extent = Eigen::Vector3d::Ones(); // per-axis extent (degenerate axes -> 1)
    double margin = 0.01;

    Eigen::Vector3d to_unit(const Eigen::Vector3d& p) const;
    Eigen::Vector3d from_unit(const Eigen::Vector3d& u) const;
};

/// Axis-aligned min-max normalization with a 1% margin per side, so inputs
/// land in [0.01, 0.99] per axis. Zero-extent axes fall back to unit extent
/// centered on the value. Throws InvalidArgumentError on empty or non-finite
/// input.
BoundingTransform normalize_positions(const std::vector<Eigen::Vector3d>& points,
                                      std::vector<Eigen::Vector3d>* normalized = nullptr);

/// Tables initialized uniformly in [-1e-4, 1e-4], drawn level by level.
HashGridState init_hash_grid(const HashGridConfig& config, Rng& rng);

/// Per-point record of the slots and trilinear weights touched by one encode,
/// enough to replay the backward pass without rehashing.
struct EncodeCache {
    // levels * 8 entries: slot index and weight per corner.
    std::vector<std::uint32_t> slots;
    std::vector<double> weights;
};

/// Encode one point (clamped into [0,1]^3; `clamped` reports whether any axis
/// was outside). Output length is L*F, level-major.
Eigen::VectorXd encode(const Eigen::Vector3d& x, const HashGridState& state,
                       EncodeCache* cache = nullptr, bool* clamped = nullptr);

/// Gradient of encode with respect to the embedding tables: one dense table
/// bank with the same shape as the state, filled by scatter-add.
struct HashGridGrad {
    std::vector<std::vector<double>> tables;

    explicit HashGridGrad(const HashGridConfig& config);
    void set_zero();
};

/// Scatter-adds upstream_grad x trilinear weight into each corner slot
/// touched by x. At most 8*L slots per call receive gradient.
void encode_backward(const Eigen::Vector3d& x, const Eigen::VectorXd& upstream_grad,
                     const HashGridState& state, HashGridGrad& grad);

/// Same scatter as encode_backward but replayed from a forward cache.
void encode_backward_cached(const EncodeCache& cache, const Eigen::VectorXd& upstream_grad,
                            const HashGridConfig& config, HashGridGrad& grad);

} // namespace splatpart
