/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace splatpart {

/// Deterministic random source. mt19937_64 has a standardized output
/// sequence, and all transforms below are written out explicitly, so streams
/// are bit-identical across platforms and standard library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t u64() { return eng_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1), both endpoints excluded.
    double uniform_open() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller. Stateless (no cached spare) so the
    /// draw count per call is always two words.
    double normal() {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Gumbel(0,1) noise: -log(-log(u)), u in (0,1).
    double gumbel() { return -std::log(-std::log(uniform_open())); }

    /// Unbiased-enough index in [0, n) via multiply-high; n must be > 0.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(eng_()) * n) >> 64);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace splatpart
