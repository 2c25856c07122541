#pragma once

#include <cmath>
#include <cstdint>

namespace codedq {

// xoshiro256++ (Blackman & Vigna, 2019), seeded through splitmix64.
// Pinned here so streams are reproducible across platforms and compilers.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Xoshiro256pp {
public:
    Xoshiro256pp() : s_{1, 2, 3, 4} {}

    static Xoshiro256pp seeded(std::uint64_t master, std::uint64_t replication,
                               std::uint64_t purpose) {
        std::uint64_t state = master;
        (void)splitmix64_next(state);
        state ^= (replication + 1) * 0xA0761D6478BD642FULL;
        (void)splitmix64_next(state);
        state ^= (purpose + 1) * 0xE7037ED1A0B428DBULL;
        Xoshiro256pp rng;
        for (auto& word : rng.s_) word = splitmix64_next(state);
        return rng;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

    double exponential(double rate) {
        return -std::log1p(-uniform01()) / rate;
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int r) {
        return (x << r) | (x >> (64 - r));
    }

    std::uint64_t s_[4];
};

}  // namespace codedq
