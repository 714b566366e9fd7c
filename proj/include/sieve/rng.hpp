#pragma once

#include <cstdint>
#include <initializer_list>

namespace sieve {

// SplitMix64 output mix (bijective on 64-bit words).
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based stream: the state walks a SplitMix64 sequence whose start is
// derived by hashing (master seed, stream ids...). Distinct id tuples give
// statistically independent streams, so sampling can be sharded over blocks,
// draws or trials without sharing any mutable state.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : state_(seed) {}

    static RngStream derive(uint64_t master, std::initializer_list<uint64_t> ids) {
        uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
        for (uint64_t id : ids) h = mix64(h ^ mix64(id));
        return RngStream(h);
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0,n) by rejection from the top.
    uint64_t next_below(uint64_t n) {
        const uint64_t threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

private:
    uint64_t state_;
};

} // namespace sieve
