#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cge {

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, level, cell, stream), so sampling order and thread layout never
/// affect the result.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t level, std::uint64_t cell, std::uint64_t stream) const {
        std::uint64_t h = mix(seed_ ^ 0x9e3779b97f4a7c15ULL);
        h = mix(h ^ (level * 0xbf58476d1ce4e5b9ULL));
        h = mix(h ^ (cell + 0x94d049bb133111ebULL));
        return mix(h ^ (stream * 0xd6e8feb86659fd93ULL));
    }

    /// Uniform in (0,1), never exactly 0 or 1.
    double uniform(std::uint64_t level, std::uint64_t cell, std::uint64_t stream) const {
        return (static_cast<double>(bits(level, cell, stream) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller on two independent uniforms.
    double normal(std::uint64_t level, std::uint64_t cell) const {
        const double u1 = uniform(level, cell, 0);
        const double u2 = uniform(level, cell, 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace cge
