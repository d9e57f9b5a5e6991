#pragma once

#include <cstdint>

namespace blelat {

// Reproducible split-stream random numbers.
//
// Every (seed, run_index, stream_index) triple maps to an independent
// xoshiro256** generator whose state is expanded from the triple with the
// splitmix64 finalizer. Both algorithms are the public-domain designs of
// Blackman & Vigna; xoshiro256** passes BigCrush. Nothing here depends on
// libstdc++ distribution internals, so sequences are identical across
// platforms and compilers.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Xoshiro256ss {
public:
    Xoshiro256ss(std::uint64_t seed, std::uint64_t run_index, std::uint64_t stream_index) {
        std::uint64_t sm = seed;
        sm ^= splitmix64_next(run_index) + 0x6a09e667f3bcc908ULL;
        sm ^= splitmix64_next(stream_index) + 0xbb67ae8584caa73bULL;
        for (auto& w : s_) w = splitmix64_next(sm);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform integer in [lo, hi], inclusive. Unbiased (rejection sampling).
    /// lo == hi consumes no randomness, so degenerate draws (m = 1 mode
    /// index, r = 0 delay) leave the stream untouched.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo >= hi) return lo;
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t reject_below = (0 - range) % range;  // 2^64 mod range
        for (;;) {
            const std::uint64_t v = next();
            if (v >= reject_below) return lo + static_cast<std::int64_t>(v % range);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}
