#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace nolab {

/// Stateless counter-based random numbers. Every draw is a pure function of
/// (seed, index, counter), so sample generation can be parallelized and
/// replayed in any order with bit-identical results.
namespace rng {

/// SplitMix64 finalizer.
inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t index, std::uint64_t counter) {
    return mix(mix(mix(seed) ^ index) ^ counter);
}

/// Uniform in (0, 1); never returns exactly 0.
inline double uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t counter) {
    const std::uint64_t bits = key(seed, index, counter);
    return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two counters (2c, 2c+1).
inline double gaussian(std::uint64_t seed, std::uint64_t index, std::uint64_t counter) {
    const double u1 = uniform(seed, index, 2 * counter);
    const double u2 = uniform(seed, index, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng
}  // namespace nolab
