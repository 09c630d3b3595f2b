// Deterministic, stream-splittable PRNG for Monte Carlo runs.
//
// Every random draw in the library comes from a Rng obtained through
// Rng::stream(master_seed, id0, id1, id2). Streams are derived by hashing
// the key words, so (seed, trajectory, outer_step, purpose) always yields
// the same sequence regardless of thread count or evaluation order. Core
// generator is xoshiro256++ with splitmix64 seeding; normal variates use
// Box-Muller so results do not depend on the C++ library's distribution
// internals.

#ifndef TMFM_RNG_HPP
#define TMFM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace tmfm {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    // Derive an independent stream from a master seed and up to three
    // key words (e.g. trajectory index, outer step, purpose tag).
    static Rng stream(std::uint64_t master, std::uint64_t a = 0,
                      std::uint64_t b = 0, std::uint64_t c = 0) {
        std::uint64_t sm = master;
        std::uint64_t h = splitmix64(sm);
        sm ^= a + kGolden;
        h ^= splitmix64(sm);
        sm ^= b + 0xD1B54A32D192ED03ull;
        h ^= splitmix64(sm);
        sm ^= c + 0x8CB92BA72F3D8DD7ull;
        h ^= splitmix64(sm);
        return Rng(h);
    }

    std::uint64_t next_u64() {
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

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [a, b).
    double uniform(double a, double b) { return a + uniform() * (b - a); }

    // Integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Rejection-free modulo bias is negligible for n << 2^64; use
        // Lemire-style multiply-shift for uniformity anyway.
        const unsigned __int128 m =
            static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via Box-Muller, pairwise cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        // Guard against log(0); shifts u1 into (0, 1].
        u1 = 1.0 - u1;
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    void normal_fill(std::span<double> out) {
        for (auto& v : out) v = normal();
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Purpose tags for stream derivation; keeps draw sequences of different
// roles disjoint even when the other key words coincide.
namespace stream_tag {
inline constexpr std::uint64_t init_state = 0;
inline constexpr std::uint64_t inner_noise = 1;
inline constexpr std::uint64_t component_pick = 2;
inline constexpr std::uint64_t target_draw = 3;
inline constexpr std::uint64_t bootstrap = 4;
inline constexpr std::uint64_t scratch = 5;
}  // namespace stream_tag

}  // namespace tmfm

#endif  // TMFM_RNG_HPP
