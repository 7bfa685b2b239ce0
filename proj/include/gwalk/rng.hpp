#pragma once

#include <cstdint>
#include <string_view>

namespace gwalk {

inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t splitmix64(uint64_t& state) {
    return mix64(state += 0x9e3779b97f4a7c15ULL);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// xoshiro256++ stream; seeded via splitmix64 so any 64-bit key is usable.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0,1) with 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in {0, ..., n-1} via bitmask rejection (unbiased, deterministic)
    uint64_t uniform_below(uint64_t n) {
        if (n <= 1) return 0;
        uint64_t mask = ~uint64_t{0} >> __builtin_clzll(n - 1 | 1);
        uint64_t v;
        do {
            v = next_u64() & mask;
        } while (v >= n);
        return v;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

// Derives an independent stream key from a master seed, a purpose tag, and up
// to two structured indices (e.g. ladder step and trial). Streams derived with
// distinct inputs are statistically independent; the derivation is pure, so a
// given (seed, tag, a, b) always names the same stream no matter which worker
// asks for it.
inline uint64_t derive_stream(uint64_t master, std::string_view tag,
                              uint64_t a = 0, uint64_t b = 0) {
    uint64_t k = mix64(master ^ fnv1a64(tag));
    k = mix64(k + 0x9e3779b97f4a7c15ULL * (a + 1));
    k = mix64(k + 0xd1b54a32d192ed03ULL * (b + 1));
    return k;
}

inline Rng derive_rng(uint64_t master, std::string_view tag,
                      uint64_t a = 0, uint64_t b = 0) {
    return Rng(derive_stream(master, tag, a, b));
}

} // namespace gwalk
