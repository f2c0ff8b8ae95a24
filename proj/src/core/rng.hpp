#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

#include "util.hpp"

namespace skiprec {

// All randomness in the toolkit flows through this generator so that results
// are bit-reproducible across platforms and reimplementations. The algorithm
// is xoshiro256** (Blackman & Vigna), seeded through splitmix64. Both are
// fully specified by their published constants; see README for the exact
// update rules a reimplementation must match.

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a root seed plus tags (e.g. epoch,
// session index). Chained splitmix64 over the words.
inline uint64_t mix_seed(std::initializer_list<uint64_t> words) {
    uint64_t state = 0x6a09e667f3bcc908ULL;
    uint64_t out = 0;
    for (uint64_t w : words) {
        state ^= w;
        out = splitmix64(state);
    }
    return out;
}

class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    uint64_t next_u64() {
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 significant bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n), unbiased via rejection of the 2^64 mod n excess.
    uint64_t next_below(uint64_t n) {
        if (n == 0) fail_config("next_below: n must be positive");
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via the Marsaglia polar method; the spare draw is
    // discarded to keep the call sequence position-independent.
    double next_normal();

    // N(0,1) restricted to [lo, hi] by rejection.
    double next_truncated_normal(double lo, double hi) {
        for (;;) {
            double x = next_normal();
            if (x >= lo && x <= hi) return x;
        }
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<uint64_t, 4> s_{};
};

}  // namespace skiprec
