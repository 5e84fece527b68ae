#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace forage {

/// SplitMix64 finalizer. Used for all seed derivation so that serial and
/// parallel evaluation see the same per-run seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child seed `index` of `master`. Pure function; the mapping is part of the
/// reproducibility contract and must not change.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix64(mix64(master) ^ (index * 0xd1b54a32d192ed03ULL + 0x8bb84b93962eacc9ULL));
}

// Named sub-streams, so different subsystems never share a seed.
namespace stream {
inline constexpr std::uint64_t episodes = 0x6570697364ULL;
inline constexpr std::uint64_t cursor = 0x637572736fULL;
inline constexpr std::uint64_t evaluation = 0x6576616cULL;
inline constexpr std::uint64_t levels = 0x6c6576656cULL;
inline constexpr std::uint64_t edits = 0x65646974ULL;
inline constexpr std::uint64_t policy = 0x706f6cULL;
} // namespace stream

/// Portable random stream: mt19937_64 is fully specified by the standard, the
/// distributions below are written out so results do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = engine_();
        while (x >= limit)
            x = engine_();
        return x % bound;
    }

    int index(int bound) { return static_cast<int>(below(static_cast<std::uint64_t>(bound))); }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Box-Muller (one value per call).
    double normal()
    {
        constexpr double two_pi = 6.283185307179586476925;
        double u1 = uniform01();
        while (u1 <= 0.0)
            u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::mt19937_64 engine_;
};

} // namespace forage
