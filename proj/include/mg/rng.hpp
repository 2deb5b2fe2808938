#pragma once

#include <cstdint>
#include <cmath>

// Deterministic random number machinery for the whole simulator.
//
// One root seed drives everything. Sub-streams (signal, noise, per-agent
// strategy draws, per-agent tie-breaks, ensemble members, ...) get their own
// generator whose seed is derived with derive_seed(); adding or removing
// agents therefore never perturbs the draws of unrelated streams.
//
// The exact algorithms are part of the reproducibility contract and are
// mirrored by the scripted oracle under tests/oracle/:
//   - seed derivation: two chained splitmix64 finalizer passes
//   - generator:       xoshiro256++, state filled from splitmix64
//   - uniform01:       top 53 bits, value in [0, 1)
//   - uniform_below:   128-bit multiply-shift of one raw draw
//   - gaussian:        one-shot Box-Muller (two uniforms per variate)

namespace mg {

inline constexpr std::uint64_t kSplitMixGamma = 0x9e3779b97f4a7c15ULL;

/// splitmix64 finalizer step (advances by the golden gamma, then mixes).
inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += kSplitMixGamma;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Named sub-stream domains. Values are stable identifiers; do not reorder.
enum class Stream : std::uint64_t {
    signal = 1,         // information pattern draw, one stream per game
    noise = 2,          // external imbalance draw, one stream per game
    strategy_draw = 3,  // strategy table entries, one stream per agent
    tie_break = 4,      // equal-score strategy choice, one stream per agent
    ensemble = 5,       // per-sample root seeds of an ensemble
    weight_draw = 6,    // sampled weight distributions
    sweep = 7           // per-grid-point seed bases of a sweep
};

/// Derive the seed of sub-stream (stream, index) from a root seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream,
                                           std::uint64_t index = 0) noexcept {
    std::uint64_t z = splitmix64(root ^ (kSplitMixGamma * static_cast<std::uint64_t>(stream)));
    z = splitmix64(z ^ (0xd1b54a32d192ed03ULL * (index + 1)));
    return z;
}

/// xoshiro256++ generator with the sampling helpers used by the engine.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            word = splitmix64(x);
            x = word;
        }
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double uniform01() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t uniform_below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// +1 with probability p_plus, else -1.
    int sign(double p_plus) noexcept {
        return uniform01() < p_plus ? +1 : -1;
    }

    /// Gaussian variate via Box-Muller; consumes exactly two uniforms.
    double gaussian(double mean, double sigma) noexcept {
        double u1 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * kPi * u2);
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

/// FNV-1a over a byte range; used for stable config hashes.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) noexcept {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= bytes[i];
        hash *= 1099511628211ULL;
    }
    return hash;
}

}  // namespace mg
