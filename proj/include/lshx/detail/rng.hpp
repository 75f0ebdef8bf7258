#pragma once

#include <cstdint>

namespace lshx::detail {

using uint128 = unsigned __int128;

inline constexpr uint64_t golden64 = 0x9e3779b97f4a7c15ull;

/// Finalizer of the splitmix64 generator; a 64-bit bijection with good
/// avalanche, used for seed derivation and tuple fingerprinting.
inline constexpr uint64_t mix64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

/// Deterministic sub-seed for draw `index` within stream `lane` of `master`.
/// Every component of the toolkit derives its randomness through this, so a
/// single build seed reproduces the whole structure.
inline constexpr uint64_t derive_seed(uint64_t master, uint64_t lane, uint64_t index) {
    uint64_t h = mix64(master + golden64);
    h = mix64(h ^ (lane * 0xff51afd7ed558ccdull));
    h = mix64(h ^ (index * 0xc4ceb9fe1a85ec53ull));
    return h;
}

/// splitmix64 stream. Self-contained so that sampled structures are
/// bit-reproducible independently of the standard library implementation.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        state_ += golden64;
        return mix64(state_);
    }

    /// Unbiased draw from [0, n), n >= 1, by rejection.
    uint64_t below(uint64_t n) {
        uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    uint128 next128() {
        return (uint128(next()) << 64) | next();
    }

private:
    uint64_t state_;
};

/// Multiply-add-shift over 64-bit keys with 128-bit parameters: the top 64
/// bits of a*x+b mod 2^128. Strongly universal, so pairs of distinct keys
/// hash pairwise-independently and uniformly.
inline uint64_t mul_add_shift64(uint128 a, uint128 b, uint64_t x) {
    return static_cast<uint64_t>((a * x + b) >> 64);
}

/// Top bit of a*x+b mod 2^128: a strongly universal one-bit hash, so
/// Pr[f(u) = f(v)] is exactly 1/2 for u != v.
inline uint64_t mul_add_shift_bit(uint128 a, uint128 b, uint64_t x) {
    return static_cast<uint64_t>((a * x + b) >> 127);
}

/// Map a uniform 64-bit value onto [0, m) preserving near-uniformity
/// (exactly uniform when m is a power of two).
inline uint64_t fastrange64(uint64_t h, uint64_t m) {
    return static_cast<uint64_t>((uint128(h) * m) >> 64);
}

}  // namespace lshx::detail
