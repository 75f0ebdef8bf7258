#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "lshx/detail/io.hpp"
#include "lshx/detail/rng.hpp"
#include "lshx/families.hpp"

namespace lshx {

/// Parameters of the 1-bit sketching layer: b sketch bits (a multiple of 64),
/// the agreement threshold lambda = (1+p2)/2 + (p1-p2)/4 sitting midway
/// between the two agreement means, and the integer distance threshold
/// theta = floor((1-lambda) b). A candidate is reported iff its sketch
/// distance is strictly below theta.
struct SketchParams {
    uint64_t b;
    double lambda;
    uint64_t theta;
};

/// b = 64 ceil((8 ln(4n) / (p1-p2)^2) / 64), making the per-point Hoeffding
/// failure e^{-b (p1-p2)^2 / 8} at most 1/(4n) and the union over n points at
/// most 1/4. Throws when p1 = p2 ("sketching requires a probability gap").
SketchParams derive_sketch_params(uint64_t n, double p1, double p2);
SketchParams derive_sketch_params(uint64_t n, const Sensitivity& s);

/// Packed b-bit signature; b is a multiple of 64 and bits beyond b are zero.
struct Sketch {
    std::vector<uint64_t> words;
    uint64_t bits = 0;

    bool operator==(const Sketch&) const = default;
};

/// Word-parallel Hamming distance between equal-length sketches.
inline uint64_t sketch_distance(const Sketch& a, const Sketch& b) {
    if (a.bits != b.bits || a.words.size() != b.words.size()) {
        throw std::invalid_argument("sketch distance: length mismatch");
    }
    uint64_t d = 0;
    for (size_t i = 0; i < a.words.size(); ++i) {
        d += std::popcount(a.words[i] ^ b.words[i]);
    }
    return d;
}

/// Draws b family functions h_i and b strongly universal one-bit maps f_i;
/// the i-th sketch bit is f_i(h_i(x)), so a pair with collision probability p
/// agrees on each bit with probability (1+p)/2.
template <typename Family>
class Sketcher {
public:
    using Point = typename Family::Point;

    Sketcher(Family family, uint64_t b, uint64_t seed)
        : family_(std::move(family)), b_(b), seed_(seed) {
        if (b == 0 || b % 64 != 0) {
            throw std::invalid_argument("sketcher: b must be a positive multiple of 64");
        }
        fns_.reserve(b);
        bits_.reserve(b);
        for (uint64_t i = 0; i < b; ++i) {
            fns_.push_back(family_.sample(detail::derive_seed(seed, lane_fns, i)));
            detail::SplitMix64 rng(detail::derive_seed(seed, lane_bits, i));
            bits_.push_back(OneBit{rng.next128(), rng.next128()});
        }
    }

    Sketch sketch(const Point& x) const {
        family_.check_point(x);
        Sketch s;
        s.bits = b_;
        s.words.assign(b_ / 64, 0);
        for (uint64_t i = 0; i < b_; ++i) {
            uint64_t bit = detail::mul_add_shift_bit(bits_[i].a, bits_[i].b, fns_[i](x));
            s.words[i >> 6] |= bit << (i & 63);
        }
        return s;
    }

    uint64_t bits() const { return b_; }
    uint64_t seed() const { return seed_; }
    const Family& family() const { return family_; }

private:
    static constexpr uint64_t lane_fns = 21;
    static constexpr uint64_t lane_bits = 22;

    struct OneBit {
        detail::uint128 a, b;
    };

    Family family_;
    uint64_t b_;
    uint64_t seed_;
    std::vector<typename Family::Fn> fns_;
    std::vector<OneBit> bits_;
};

// ---------------------------------------------------------------------------
// SKB1 container: header "SKB1", n, b, then n rows of b/8 bytes with
// little-endian bit order within bytes.

inline void write_sketch_file(std::ostream& out, std::span<const Sketch> sketches) {
    detail::write_magic(out, "SKB1", 4);
    detail::write_u64(out, sketches.size());
    uint64_t b = sketches.empty() ? 0 : sketches.front().bits;
    detail::write_u64(out, b);
    for (const Sketch& s : sketches) {
        if (s.bits != b) throw std::invalid_argument("sketch file: mixed sketch lengths");
        for (uint64_t w : s.words) detail::write_u64(out, w);
    }
    if (!out) throw std::runtime_error("sketch file: write failed");
}

inline std::vector<Sketch> read_sketch_file(std::istream& in) {
    detail::expect_magic(in, "SKB1", 4, "SKB1 sketch");
    uint64_t n = detail::read_u64(in);
    uint64_t b = detail::read_u64(in);
    if (b % 64 != 0) throw std::runtime_error("sketch file: length not a multiple of 64");
    std::vector<Sketch> out;
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        Sketch s;
        s.bits = b;
        s.words.reserve(b / 64);
        for (uint64_t w = 0; w < b / 64; ++w) s.words.push_back(detail::read_u64(in));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace lshx
