#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace cotrain {

// Seed mixing / hashing used to derive independent streams from a base seed
// plus structured salts (episode index, role tags, ...).

inline uint64_t splitmix64_next(uint64_t& state) noexcept {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t hash_str(std::string_view s) noexcept {
    uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t mix_seed(std::initializer_list<uint64_t> parts) noexcept {
    uint64_t state = 0x6a09e667f3bcc909ull;
    for (uint64_t p : parts) {
        state ^= splitmix64_next(state) + p;
        (void)splitmix64_next(state);
    }
    uint64_t copy = state;
    return splitmix64_next(copy);
}

// xoshiro256++ with hand-rolled distributions. Every draw is fully specified
// here, so streams are identical across platforms and standard libraries;
// nothing in the project may use std::*_distribution.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) noexcept : seed_(seed) {
        uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    uint64_t next_u64() noexcept {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // [0, 1), 53-bit resolution
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform();
    }

    // [0, n), unbiased via rejection; n must be > 0
    uint64_t uniform_below(uint64_t n) noexcept {
        uint64_t x, r;
        do {
            x = next_u64();
            r = x % n;
        } while (x - r > UINT64_MAX - (n - 1));
        return r;
    }

    // Box-Muller; consumes exactly two uniform draws per call.
    double gaussian() noexcept;

    double gaussian(double mean, double stddev) noexcept {
        return mean + stddev * gaussian();
    }

    // Independent child stream derived from the original seed, not the
    // current state: forks with distinct tags never collide regardless of
    // how much the parent has been consumed.
    Rng fork(uint64_t stream_tag) const noexcept {
        return Rng(mix_seed({seed_, stream_tag}));
    }

    uint64_t seed() const noexcept { return seed_; }

private:
    static constexpr uint64_t rotl(uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    uint64_t seed_;
    uint64_t state_[4];
};

}  // namespace cotrain
