/* SPDX-License-Identifier: Apache-2.0 */
#include "splatpart/hash_grid.hpp"

#include <cmath>

namespace splatpart {

namespace {

constexpr std::uint32_t kPrimeY = 2654435761u;
constexpr std::uint32_t kPrimeZ = 805459861u;

inline std::uint32_t hash_corner(std::uint32_t cx, std::uint32_t cy, std::uint32_t cz,
                                 std::uint32_t table_mask) {
    return (cx ^ (cy * kPrimeY) ^ (cz * kPrimeZ)) & table_mask;
}

bool is_power_of_two(std::uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

} // namespace

double HashGridConfig::effective_growth() const {
    if (growth_factor > 1.0) {
        return growth_factor;
    }
    if (levels <= 1) {
        return 2.0;
    }
    return std::pow(2048.0 / base_resolution, 1.0 / (levels - 1));
}

std::uint32_t HashGridConfig::level_resolution(int level) const {
    // The 1e-9 guard absorbs pow() rounding when growth was derived from a
    // target finest resolution.
    const double r = base_resolution * std::pow(effective_growth(), level);
    return static_cast<std::uint32_t>(std::floor(r + 1e-9));
}

void HashGridConfig::validate() const {
    if (levels < 1 || features_per_level < 1) {
        throw InvalidArgumentError("hash grid needs levels >= 1 and features_per_level >= 1");
    }
    if (!is_power_of_two(table_size)) {
        throw InvalidArgumentError("hash grid table_size must be a power of two");
    }
    if (base_resolution < 1) {
        throw InvalidArgumentError("hash grid base_resolution must be >= 1");
    }
    if (growth_factor > 0.0 && growth_factor <= 1.0) {
        throw InvalidArgumentError("hash grid growth_factor must be > 1");
    }
}

Eigen::Vector3d BoundingTransform::to_unit(const Eigen::Vector3d& p) const {
    Eigen::Vector3d u;
    for (int a = 0; a < 3; ++a) {
        u[a] = margin + (1.0 - 2.0 * margin) * (p[a] - lo[a]) / extent[a];
    }
    return u;
}

Eigen::Vector3d BoundingTransform::from_unit(const Eigen::Vector3d& u) const {
    Eigen::Vector3d p;
    for (int a = 0; a < 3; ++a) {
        p[a] = lo[a] + (u[a] - margin) / (1.0 - 2.0 * margin) * extent[a];
    }
    return p;
}

BoundingTransform normalize_positions(const std::vector<Eigen::Vector3d>& points,
                                      std::vector<Eigen::Vector3d>* normalized) {
    if (points.empty()) {
        throw InvalidArgumentError("normalize_positions: empty point set");
    }
    Eigen::Vector3d lo = points[0];
    Eigen::Vector3d hi = points[0];
    for (const auto& p : points) {
        if (!p.allFinite()) {
            throw InvalidArgumentError("normalize_positions: non-finite coordinate");
        }
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }

    BoundingTransform t;
    for (int a = 0; a < 3; ++a) {
        const double ext = hi[a] - lo[a];
        if (ext > 0.0) {
            t.lo[a] = lo[a];
            t.extent[a] = ext;
        } else {
            // Degenerate axis: unit extent centered on the value.
            t.lo[a] = lo[a] - 0.5;
            t.extent[a] = 1.0;
        }
    }

    if (normalized) {
        normalized->resize(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            (*normalized)[i] = t.to_unit(points[i]);
        }
    }
    return t;
}

HashGridState init_hash_grid(const HashGridConfig& config, Rng& rng) {
    config.validate();
    HashGridState state;
    state.config = config;
    state.embeddings.resize(config.levels);
    const std::size_t per_level =
        static_cast<std::size_t>(config.table_size) * config.features_per_level;
    for (auto& table : state.embeddings) {
        table.resize(per_level);
        for (auto& v : table) {
            v = rng.uniform(-1e-4, 1e-4);
        }
    }
    return state;
}

Eigen::VectorXd encode(const Eigen::Vector3d& x, const HashGridState& state,
                       EncodeCache* cache, bool* clamped) {
    const HashGridConfig& cfg = state.config;
    const int F = cfg.features_per_level;
    const std::uint32_t mask = cfg.table_size - 1;

    Eigen::Vector3d p = x;
    bool was_clamped = false;
    for (int a = 0; a < 3; ++a) {
        if (p[a] < 0.0) { p[a] = 0.0; was_clamped = true; }
        if (p[a] > 1.0) { p[a] = 1.0; was_clamped = true; }
    }
    if (clamped) {
        *clamped = was_clamped;
    }

    Eigen::VectorXd out(cfg.output_dim());
    if (cache) {
        cache->slots.resize(static_cast<std::size_t>(cfg.levels) * 8);
        cache->weights.resize(static_cast<std::size_t>(cfg.levels) * 8);
    }

    for (int level = 0; level < cfg.levels; ++level) {
        const std::uint32_t res = cfg.level_resolution(level);
        std::uint32_t c0[3];
        double frac[3];
        for (int a = 0; a < 3; ++a) {
            const double scaled = p[a] * res;
            double cell = std::floor(scaled);
            if (cell > res - 1.0) {
                cell = res - 1.0; // x == 1 lands on the last cell with weight 1
            }
            c0[a] = static_cast<std::uint32_t>(cell);
            frac[a] = scaled - cell;
        }

        const std::vector<double>& table = state.embeddings[level];
        double* dst = out.data() + static_cast<std::ptrdiff_t>(level) * F;
        for (int f = 0; f < F; ++f) {
            dst[f] = 0.0;
        }

        for (int corner = 0; corner < 8; ++corner) {
            const std::uint32_t cx = c0[0] + (corner & 1);
            const std::uint32_t cy = c0[1] + ((corner >> 1) & 1);
            const std::uint32_t cz = c0[2] + ((corner >> 2) & 1);
            const double w = ((corner & 1) ? frac[0] : 1.0 - frac[0]) *
                             (((corner >> 1) & 1) ? frac[1] : 1.0 - frac[1]) *
                             (((corner >> 2) & 1) ? frac[2] : 1.0 - frac[2]);
            const std::uint32_t slot = hash_corner(cx, cy, cz, mask);
            const double* row = table.data() + static_cast<std::size_t>(slot) * F;
            for (int f = 0; f < F; ++f) {
                dst[f] += w * row[f];
            }
            if (cache) {
                const std::size_t ci = static_cast<std::size_t>(level) * 8 + corner;
                cache->slots[ci] = slot;
                cache->weights[ci] = w;
            }
        }
    }
    return out;
}

HashGridGrad::HashGridGrad(const HashGridConfig& config) {
    tables.resize(config.levels);
    const std::size_t per_level =
        static_cast<std::size_t>(config.table_size) * config.features_per_level;
    for (auto& t : tables) {
        t.assign(per_level, 0.0);
    }
}

void HashGridGrad::set_zero() {
    for (auto& t : tables) {
        std::fill(t.begin(), t.end(), 0.0);
    }
}

void encode_backward_cached(const EncodeCache& cache, const Eigen::VectorXd& upstream_grad,
                            const HashGridConfig& config, HashGridGrad& grad) {
    const int F = config.features_per_level;
    if (upstream_grad.size() != config.output_dim()) {
        throw InvalidArgumentError("encode_backward: upstream gradient has wrong dimension");
    }
    for (int level = 0; level < config.levels; ++level) {
        const double* up = upstream_grad.data() + static_cast<std::ptrdiff_t>(level) * F;
        std::vector<double>& table = grad.tables[level];
        for (int corner = 0; corner < 8; ++corner) {
            const std::size_t ci = static_cast<std::size_t>(level) * 8 + corner;
            const double w = cache.weights[ci];
            double* row = table.data() + static_cast<std::size_t>(cache.slots[ci]) * F;
            for (int f = 0; f < F; ++f) {
                row[f] += w * up[f];
            }
        }
    }
}

void encode_backward(const Eigen::Vector3d& x, const Eigen::VectorXd& upstream_grad,
                     const HashGridState& state, HashGridGrad& grad) {
    EncodeCache cache;
    encode(x, state, &cache);
    encode_backward_cached(cache, upstream_grad, state.config, grad);
}

} // namespace splatpart
