#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lshx/detail/rng.hpp"

namespace lshx {

/// Collision-probability profile of a locality-sensitive family: pairs within
/// r1 collide with probability at least p1, pairs beyond r2 with probability
/// at most p2. Both gaps are strict; degenerate profiles are rejected.
struct Sensitivity {
    double r1;
    double r2;
    double p1;
    double p2;

    Sensitivity(double r1, double r2, double p1, double p2)
        : r1(r1), r2(r2), p1(p1), p2(p2) {
        if (!(r1 > 0.0) || !(r1 < r2)) {
            throw std::invalid_argument("sensitivity: need 0 < r1 < r2");
        }
        if (!(p2 > 0.0) || !(p2 < p1) || !(p1 < 1.0)) {
            throw std::invalid_argument("sensitivity: need 0 < p2 < p1 < 1");
        }
    }
};

// ---------------------------------------------------------------------------
// Points

/// Point of the Hamming cube {0,1}^d, packed 64 bits per word; bit i lives at
/// words[i >> 6] bit (i & 63) and bits past d must be zero.
struct HammingPoint {
    std::vector<uint64_t> words;

    bool operator==(const HammingPoint&) const = default;
};

inline HammingPoint hamming_point_from_bits(std::string_view bits) {
    HammingPoint p;
    p.words.assign((bits.size() + 63) / 64, 0);
    for (size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            p.words[i >> 6] |= uint64_t(1) << (i & 63);
        } else if (bits[i] != '0') {
            throw std::invalid_argument("hamming point: expected a {0,1} string");
        }
    }
    return p;
}

inline std::string hamming_point_to_bits(const HammingPoint& p, uint64_t dim) {
    std::string s(dim, '0');
    for (uint64_t i = 0; i < dim; ++i) {
        if ((p.words[i >> 6] >> (i & 63)) & 1) s[i] = '1';
    }
    return s;
}

inline uint64_t hamming_distance(const HammingPoint& a, const HammingPoint& b) {
    if (a.words.size() != b.words.size()) {
        throw std::invalid_argument("hamming distance: dimension mismatch");
    }
    uint64_t d = 0;
    for (size_t i = 0; i < a.words.size(); ++i) {
        d += std::popcount(a.words[i] ^ b.words[i]);
    }
    return d;
}

/// Non-empty subset of the universe {1, ..., u}, elements strictly increasing.
struct JaccardSet {
    std::vector<uint32_t> elems;

    bool operator==(const JaccardSet&) const = default;
};

inline double jaccard_distance(const JaccardSet& a, const JaccardSet& b) {
    size_t i = 0, j = 0, both = 0;
    while (i < a.elems.size() && j < b.elems.size()) {
        if (a.elems[i] == b.elems[j]) {
            ++both, ++i, ++j;
        } else if (a.elems[i] < b.elems[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    size_t either = a.elems.size() + b.elems.size() - both;
    if (either == 0) throw std::invalid_argument("jaccard distance: empty sets");
    return 1.0 - double(both) / double(either);
}

// ---------------------------------------------------------------------------
// Families

/// Bit sampling over the Hamming cube: a draw picks a uniform coordinate i
/// and hashes x to its i-th bit. A pair at distance t collides with
/// probability exactly 1 - t/d.
class BitSamplingFamily {
public:
    using Point = HammingPoint;

    class Fn {
    public:
        explicit Fn(uint32_t coord) : coord_(coord) {}

        uint64_t operator()(const Point& x) const {
            return (x.words[coord_ >> 6] >> (coord_ & 63)) & 1;
        }

        uint32_t coord() const { return coord_; }

    private:
        uint32_t coord_;
    };

    static constexpr uint32_t space_tag = 1;

    explicit BitSamplingFamily(uint64_t dim) : dim_(dim) {
        if (dim == 0) throw std::invalid_argument("bit sampling: dimension must be positive");
        if (dim > uint64_t(1) << 32) throw std::invalid_argument("bit sampling: dimension too large");
    }

    Fn sample(uint64_t seed) const {
        detail::SplitMix64 rng(seed);
        return Fn(static_cast<uint32_t>(rng.below(dim_)));
    }

    uint64_t dim() const { return dim_; }
    uint64_t space_size() const { return dim_; }

    void check_point(const Point& x) const {
        if (x.words.size() != (dim_ + 63) / 64) {
            throw std::invalid_argument("point does not match Hamming space of dimension " +
                                        std::to_string(dim_));
        }
        if (dim_ % 64 != 0 && !x.words.empty() &&
            (x.words.back() >> (dim_ % 64)) != 0) {
            throw std::invalid_argument("point has bits set beyond Hamming dimension " +
                                        std::to_string(dim_));
        }
    }

    double distance(const Point& a, const Point& b) const {
        return double(hamming_distance(a, b));
    }

    /// Exact collision law: Pr[h(x) = h(y)] = 1 - dist/d.
    Sensitivity sensitivity(double r1, double r2) const {
        return Sensitivity(r1, r2, 1.0 - r1 / double(dim_), 1.0 - r2 / double(dim_));
    }

private:
    uint64_t dim_;
};

/// MinHash over integer sets: a draw assigns injective priorities to the
/// universe and hashes a set to its minimum priority. With an exact random
/// permutation the collision probability equals the Jaccard similarity.
/// Universes up to 2^16 use exact Fisher-Yates permutations; larger ones use
/// a seeded strongly universal priority function.
class MinHashFamily {
public:
    using Point = JaccardSet;

    static constexpr uint64_t exact_permutation_limit = uint64_t(1) << 16;

    class Fn {
    public:
        uint64_t operator()(const Point& x) const {
            if (x.elems.empty()) {
                throw std::invalid_argument("minhash: cannot hash an empty set");
            }
            uint64_t best = ~uint64_t(0);
            if (!table_.empty()) {
                for (uint32_t e : x.elems) best = std::min(best, uint64_t(table_[e - 1]));
            } else {
                for (uint32_t e : x.elems) {
                    best = std::min(best, detail::mul_add_shift64(a_, b_, e));
                }
            }
            return best;
        }

    private:
        friend class MinHashFamily;
        std::vector<uint32_t> table_;  // exact permutation priorities, small universes
        detail::uint128 a_ = 0, b_ = 0;
    };

    static constexpr uint32_t space_tag = 2;

    explicit MinHashFamily(uint64_t universe) : universe_(universe) {
        if (universe == 0) throw std::invalid_argument("minhash: universe must be positive");
    }

    Fn sample(uint64_t seed) const {
        detail::SplitMix64 rng(seed);
        Fn fn;
        if (universe_ <= exact_permutation_limit) {
            fn.table_.resize(universe_);
            std::iota(fn.table_.begin(), fn.table_.end(), 0u);
            for (uint64_t i = universe_ - 1; i > 0; --i) {
                std::swap(fn.table_[i], fn.table_[rng.below(i + 1)]);
            }
        } else {
            fn.a_ = rng.next128();
            fn.b_ = rng.next128();
        }
        return fn;
    }

    uint64_t universe() const { return universe_; }
    uint64_t space_size() const { return universe_; }

    void check_point(const Point& x) const {
        if (x.elems.empty()) {
            throw std::invalid_argument("point is an empty set; Jaccard space requires non-empty sets");
        }
        uint32_t prev = 0;
        for (uint32_t e : x.elems) {
            if (e == 0 || e <= prev || e > universe_) {
                throw std::invalid_argument("point is not a strictly increasing subset of [" +
                                            std::to_string(universe_) + "]");
            }
            prev = e;
        }
    }

    double distance(const Point& a, const Point& b) const {
        return jaccard_distance(a, b);
    }

    /// Collision law under exact permutations: Pr = J(A,B) = 1 - dist.
    Sensitivity sensitivity(double r1, double r2) const {
        return Sensitivity(r1, r2, 1.0 - r1, 1.0 - r2);
    }

private:
    uint64_t universe_;
};

// ---------------------------------------------------------------------------
// Powering

/// H^k: draws concatenate k independent draws of the base family, raising the
/// collision probability of every pair to its k-th power. H^0 is the family
/// holding a single constant function.
template <typename F>
class PoweredFamily {
public:
    using Point = typename F::Point;

    class Fn {
    public:
        void eval(const Point& x, std::vector<uint64_t>& out) const {
            out.clear();
            out.reserve(parts_.size());
            for (const auto& p : parts_) out.push_back(p(x));
        }

        std::vector<uint64_t> operator()(const Point& x) const {
            std::vector<uint64_t> out;
            eval(x, out);
            return out;
        }

    private:
        friend class PoweredFamily;
        std::vector<typename F::Fn> parts_;
    };

    PoweredFamily(F base, uint64_t k) : base_(std::move(base)), k_(k) {}

    Fn sample(uint64_t seed) const {
        Fn fn;
        fn.parts_.reserve(k_);
        for (uint64_t i = 0; i < k_; ++i) {
            // Draw 0 uses the caller's seed unchanged so that H^1 draws
            // coincide with base draws under the same seed.
            fn.parts_.push_back(base_.sample(i == 0 ? seed : detail::derive_seed(seed, 0x70, i)));
        }
        return fn;
    }

    uint64_t k() const { return k_; }
    const F& base() const { return base_; }
    void check_point(const Point& x) const { base_.check_point(x); }

private:
    F base_;
    uint64_t k_;
};

template <typename F>
PoweredFamily<F> power(F family, uint64_t k) {
    return PoweredFamily<F>(std::move(family), k);
}

// ---------------------------------------------------------------------------
// Pairwise-independent index hashing

/// f : [L] -> [m] from the multiply-add-shift family (strongly universal,
/// hence pairwise independent): over random seeds, Pr[f(l) = f(l')] <= 1/m
/// for l != l'. Deterministic given its seed.
class PairwiseHash {
public:
    PairwiseHash(uint64_t domain, uint64_t range, uint64_t seed)
        : domain_(domain), range_(range) {
        if (domain == 0) throw std::invalid_argument("pairwise hash: domain must be positive");
        if (range == 0) throw std::invalid_argument("pairwise hash: range must be positive");
        detail::SplitMix64 rng(seed);
        a_ = rng.next128();
        b_ = rng.next128();
    }

    uint64_t operator()(uint64_t l) const {
        return detail::fastrange64(detail::mul_add_shift64(a_, b_, l), range_);
    }

    uint64_t domain() const { return domain_; }
    uint64_t range() const { return range_; }

private:
    uint64_t domain_;
    uint64_t range_;
    detail::uint128 a_, b_;
};

// ---------------------------------------------------------------------------
// Fingerprinting

inline constexpr uint64_t default_fingerprint_seed = 0x1509e5e35c9e1242ull;

/// Seeded 64-bit digest of a tuple of hash values. Equal tuples map to equal
/// fingerprints; the tuple length is mixed in, so a tuple and its strict
/// prefix always separate.
inline uint64_t fingerprint(std::span<const uint64_t> values,
                            uint64_t seed = default_fingerprint_seed) {
    if (values.empty()) throw std::invalid_argument("fingerprint: empty tuple");
    uint64_t h = detail::mix64(seed + detail::golden64);
    for (uint64_t v : values) h = detail::mix64(h ^ v);
    return detail::mix64(h ^ (values.size() * detail::golden64));
}

}  // namespace lshx
