#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lshx/families.hpp"

namespace lshx {

// ---------------------------------------------------------------------------
// Scheme parameters

enum class SchemeKind { im, ai, dkt, hybrid };

inline const char* to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::im: return "im";
        case SchemeKind::ai: return "ai";
        case SchemeKind::dkt: return "dkt";
        case SchemeKind::hybrid: return "hybrid";
    }
    return "?";
}

inline SchemeKind scheme_kind_from_string(std::string_view s) {
    if (s == "im") return SchemeKind::im;
    if (s == "ai") return SchemeKind::ai;
    if (s == "dkt") return SchemeKind::dkt;
    if (s == "hybrid") return SchemeKind::hybrid;
    throw std::invalid_argument("unknown scheme '" + std::string(s) +
                                "' (expected im, ai, dkt or hybrid)");
}

/// Independent tables: L draws from H^k.
struct ImParams {
    uint64_t k;
    uint64_t L;
};

/// Tensoring: eta repetitions of all tuples over t collections of m1 draws
/// from H^k1 plus one collection of m2 draws from H^k2.
struct AiParams {
    uint64_t t, k, k1, k2, m1, m2, eta;
    double phi;
    uint64_t L;  // eta * m1^t * m2
};

/// Pairwise-independent sampling from k pools of m pre-drawn functions.
struct DktParams {
    uint64_t k, m, L;
    double eps;
};

/// Two DKT collections paired by tensoring; L = L1 * L2.
struct HybridParams {
    uint64_t k, k1, k2, m1, m2, L1, L2;
    double eps;
};

inline constexpr double dkt_eps_theorem9 = 0.25;
inline constexpr double dkt_eps_hybrid = 1.0 / 6.0;

using SchemeParams = std::variant<ImParams, AiParams, DktParams, HybridParams>;

struct DeriveOverrides {
    std::optional<uint64_t> tensor_t;  // AI: pin t instead of argmin
    std::optional<double> dkt_eps;     // DKT: pin epsilon
    bool sketching = false;            // hybrid: double L_i for the sketch failure budget
};

/// Resolve the scheme's integer parameters for a collection of n points
/// (n >= 2) and a sensitivity profile, honoring every ceiling exactly.
/// Throws std::invalid_argument ("parameters out of range") when a count
/// does not fit the runtime representation.
SchemeParams derive_params(SchemeKind kind, uint64_t n, const Sensitivity& s,
                           const DeriveOverrides& overrides = {});

// Preset constructors pinning k directly instead of deriving it from n.
ImParams im_params_for_k(uint64_t k, double p1);
AiParams ai_params_for_k(uint64_t k, double p1, std::optional<uint64_t> t = {});
DktParams dkt_params_for_k(uint64_t k, double p1, double eps = dkt_eps_theorem9);
HybridParams hybrid_params_for_k(uint64_t k, double p1, bool sketching = false);

inline SchemeKind scheme_kind(const SchemeParams& p) {
    return std::visit(
        [](const auto& v) -> SchemeKind {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ImParams>) return SchemeKind::im;
            if constexpr (std::is_same_v<T, AiParams>) return SchemeKind::ai;
            if constexpr (std::is_same_v<T, DktParams>) return SchemeKind::dkt;
            if constexpr (std::is_same_v<T, HybridParams>) return SchemeKind::hybrid;
        },
        p);
}

namespace detail {
inline uint64_t mul_checked(uint64_t a, uint64_t b, const char* what) {
    uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) {
        throw std::invalid_argument(std::string("parameters out of range: ") + what);
    }
    return r;
}

inline uint64_t pow_checked(uint64_t base, uint64_t exp, const char* what) {
    uint64_t r = 1;
    for (uint64_t i = 0; i < exp; ++i) r = mul_checked(r, base, what);
    return r;
}
}  // namespace detail

/// Number of bucket-key functions g_1..g_L.
inline uint64_t table_count(const SchemeParams& p) {
    return std::visit(
        [](const auto& v) -> uint64_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, HybridParams>) {
                return detail::mul_checked(v.L1, v.L2, "L");
            } else {
                return v.L;
            }
        },
        p);
}

/// Number of stored draws from the base family (the H of the analysis).
inline uint64_t function_count(const SchemeParams& p) {
    using detail::mul_checked;
    return std::visit(
        [](const auto& v) -> uint64_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ImParams>) {
                return mul_checked(v.L, v.k, "H");
            } else if constexpr (std::is_same_v<T, AiParams>) {
                uint64_t per_rep = mul_checked(mul_checked(v.m1, v.k1, "H"), v.t, "H") +
                                   mul_checked(v.m2, v.k2, "H");
                return mul_checked(v.eta, per_rep, "H");
            } else if constexpr (std::is_same_v<T, DktParams>) {
                return mul_checked(v.k, v.m, "H");
            } else {
                return mul_checked(v.k1, v.m1, "H") + mul_checked(v.k2, v.m2, "H");
            }
        },
        p);
}

/// Base-family evaluations needed to hash one point under every g_l.
inline uint64_t evals_per_query(const SchemeParams& p) {
    return function_count(p);  // every scheme evaluates its whole bank once
}

/// Upper bound on Pr[no g_l collision] for a near pair, from the one-sided
/// Chebyshev argument: (1 + eps*mu) / (1 + (1+eps)*mu) with mu = L*p^k.
/// Tends to eps/(1+eps) as mu grows.
inline double dkt_failure_bound(double mu, double eps) {
    if (!(mu > 0.0)) throw std::invalid_argument("dkt_failure_bound: mu must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("dkt_failure_bound: eps must be positive");
    return (1.0 + eps * mu) / (1.0 + (1.0 + eps) * mu);
}

// ---------------------------------------------------------------------------
// HashSource

/// A built scheme: the bank of drawn functions plus the recipe that expands
/// it into L bucket-key fingerprints per point. Immutable after construction;
/// evaluation is pure.
template <typename Family>
class HashSource {
public:
    using Point = typename Family::Point;

    HashSource(Family family, const SchemeParams& params, uint64_t seed)
        : family_(std::move(family)),
          params_(params),
          seed_(seed),
          fp_seed_(detail::derive_seed(seed, lane_fp, 0)) {
        std::visit([&](const auto& p) { init(p); }, params_);
    }

    SchemeKind kind() const { return scheme_kind(params_); }
    const SchemeParams& params() const { return params_; }
    uint64_t seed() const { return seed_; }
    const Family& family() const { return family_; }
    uint64_t table_count() const { return L_; }
    uint64_t function_count() const { return fns_.size(); }
    uint64_t evals_per_query() const { return lshx::evals_per_query(params_); }
    /// Width of a raw key tuple (the k of the underlying analysis).
    uint64_t key_width() const { return key_width_; }

    /// Fingerprints of g_1(x)..g_L(x), in a fixed deterministic order.
    /// Increments base_evals once per evaluation of a drawn base function.
    void evaluate_all(const Point& x, std::vector<uint64_t>& out, uint64_t& base_evals) const {
        family_.check_point(x);
        out.clear();
        out.reserve(L_);
        switch (kind()) {
            case SchemeKind::im: eval_im(x, &out, nullptr, base_evals); break;
            case SchemeKind::ai: eval_ai(x, &out, nullptr, base_evals); break;
            case SchemeKind::dkt: eval_dkt(x, &out, nullptr, base_evals); break;
            case SchemeKind::hybrid: eval_hybrid(x, &out, nullptr, base_evals); break;
        }
    }

    std::vector<uint64_t> evaluate_all(const Point& x) const {
        std::vector<uint64_t> out;
        uint64_t evals = 0;
        evaluate_all(x, out, evals);
        return out;
    }

    /// Raw concatenated key tuples, L rows of key_width() words, bypassing
    /// fingerprints. Used by the Monte-Carlo oracle and reference tests.
    void raw_keys(const Point& x, std::vector<uint64_t>& out) const {
        family_.check_point(x);
        out.clear();
        out.reserve(L_ * key_width_);
        uint64_t evals = 0;
        switch (kind()) {
            case SchemeKind::im: eval_im(x, nullptr, &out, evals); break;
            case SchemeKind::ai: eval_ai(x, nullptr, &out, evals); break;
            case SchemeKind::dkt: eval_dkt(x, nullptr, &out, evals); break;
            case SchemeKind::hybrid: eval_hybrid(x, nullptr, &out, evals); break;
        }
    }

private:
    // seed lanes
    static constexpr uint64_t lane_fns = 1;
    static constexpr uint64_t lane_samplers = 2;
    static constexpr uint64_t lane_fp = 3;

    static constexpr uint64_t max_build_size = uint64_t(1) << 28;

    uint64_t draw_seed(uint64_t index) const { return detail::derive_seed(seed_, lane_fns, index); }

    void draw_bank(uint64_t count) {
        fns_.reserve(count);
        for (uint64_t i = 0; i < count; ++i) fns_.push_back(family_.sample(draw_seed(i)));
    }

    static void check_build_size(uint64_t v, const char* what) {
        if (v > max_build_size) {
            throw std::invalid_argument(std::string("parameters out of range: ") + what +
                                        " too large to build");
        }
    }

    void init(const ImParams& p) {
        if (p.k == 0 || p.L == 0) throw std::invalid_argument("im: k and L must be positive");
        L_ = p.L;
        key_width_ = p.k;
        uint64_t bank = detail::mul_checked(p.L, p.k, "H");
        check_build_size(bank, "im bank");
        check_build_size(L_, "L");
        draw_bank(bank);
    }

    void init(const AiParams& p) {
        if (p.t == 0 || p.k == 0 || p.eta == 0) {
            throw std::invalid_argument("ai: t, k, eta must be positive");
        }
        if (p.k1 * p.t + p.k2 != p.k) throw std::invalid_argument("ai: k1*t + k2 != k");
        if (p.m1 == 0 || p.m2 == 0) throw std::invalid_argument("ai: m1, m2 must be positive");
        if (p.k2 == 0 && p.m2 != 1) throw std::invalid_argument("ai: k2 = 0 requires m2 = 1");
        uint64_t combos = detail::mul_checked(detail::pow_checked(p.m1, p.t, "L"), p.m2, "L");
        L_ = detail::mul_checked(p.eta, combos, "L");
        if (L_ != p.L) throw std::invalid_argument("ai: L != eta * m1^t * m2");
        key_width_ = p.k;
        check_build_size(L_, "L");
        uint64_t per_rep = detail::mul_checked(detail::mul_checked(p.t, p.m1, "H"), p.k1, "H");
        uint64_t tail = detail::mul_checked(p.m2, p.k2, "H");
        if (__builtin_add_overflow(per_rep, tail, &per_rep)) {
            throw std::invalid_argument("parameters out of range: H");
        }
        uint64_t bank = detail::mul_checked(p.eta, per_rep, "H");
        check_build_size(bank, "ai bank");
        draw_bank(bank);
    }

    void init(const DktParams& p) {
        if (p.k == 0 || p.m == 0 || p.L == 0) {
            throw std::invalid_argument("dkt: k, m, L must be positive");
        }
        if (p.L > uint64_t(1) << 63) {
            throw std::invalid_argument("parameters out of range: dkt L exceeds 2^63");
        }
        L_ = p.L;
        key_width_ = p.k;
        check_build_size(detail::mul_checked(p.k, p.m, "H"), "dkt bank");
        check_build_size(detail::mul_checked(p.k, p.L, "dkt index table"), "dkt index table");
        draw_bank(p.k * p.m);
        samplers_.reserve(p.k);
        sampled_.resize(p.k * p.L);
        for (uint64_t i = 0; i < p.k; ++i) {
            samplers_.emplace_back(p.L, p.m, detail::derive_seed(seed_, lane_samplers, i));
            for (uint64_t l = 0; l < p.L; ++l) {
                sampled_[i * p.L + l] = static_cast<uint32_t>(samplers_[i](l));
            }
        }
    }

    void init(const HybridParams& p) {
        if (p.k == 0 || p.k1 == 0 || p.L1 == 0 || p.L2 == 0 || p.m1 == 0 || p.m2 == 0) {
            throw std::invalid_argument("hybrid: parameters must be positive");
        }
        if (p.k1 + p.k2 != p.k) throw std::invalid_argument("hybrid: k1 + k2 != k");
        L_ = detail::mul_checked(p.L1, p.L2, "L");
        key_width_ = p.k;
        check_build_size(L_, "L");
        uint64_t bank = detail::mul_checked(p.k1, p.m1, "H");
        if (__builtin_add_overflow(bank, detail::mul_checked(p.k2, p.m2, "H"), &bank)) {
            throw std::invalid_argument("parameters out of range: H");
        }
        check_build_size(bank, "hybrid bank");
        check_build_size(detail::mul_checked(p.k1, p.L1, "index table") +
                             detail::mul_checked(p.k2, p.L2, "index table"),
                         "hybrid index table");
        draw_bank(bank);
        // Collection 1 samplers, then collection 2.
        samplers_.reserve(p.k1 + p.k2);
        sampled_.resize(p.k1 * p.L1 + p.k2 * p.L2);
        for (uint64_t i = 0; i < p.k1; ++i) {
            samplers_.emplace_back(p.L1, p.m1, detail::derive_seed(seed_, lane_samplers, i));
            for (uint64_t l = 0; l < p.L1; ++l) {
                sampled_[i * p.L1 + l] = static_cast<uint32_t>(samplers_[i](l));
            }
        }
        uint64_t off = p.k1 * p.L1;
        for (uint64_t i = 0; i < p.k2; ++i) {
            samplers_.emplace_back(p.L2, p.m2,
                                   detail::derive_seed(seed_, lane_samplers, p.k1 + i));
            for (uint64_t l = 0; l < p.L2; ++l) {
                sampled_[off + i * p.L2 + l] = static_cast<uint32_t>(samplers_[p.k1 + i](l));
            }
        }
    }

    void emit(std::vector<uint64_t>* fps, std::vector<uint64_t>* raw,
              std::span<const uint64_t> tuple) const {
        if (fps) fps->push_back(fingerprint(tuple, fp_seed_));
        if (raw) raw->insert(raw->end(), tuple.begin(), tuple.end());
    }

    void eval_im(const Point& x, std::vector<uint64_t>* fps, std::vector<uint64_t>* raw,
                 uint64_t& evals) const {
        const auto& p = std::get<ImParams>(params_);
        std::vector<uint64_t> tup(p.k);
        size_t idx = 0;
        for (uint64_t l = 0; l < p.L; ++l) {
            for (uint64_t j = 0; j < p.k; ++j) {
                tup[j] = fns_[idx++](x);
                ++evals;
            }
            emit(fps, raw, tup);
        }
    }

    void eval_ai(const Point& x, std::vector<uint64_t>* fps, std::vector<uint64_t>* raw,
                 uint64_t& evals) const {
        const auto& p = std::get<AiParams>(params_);
        const uint64_t m2_eff = p.k2 == 0 ? 1 : p.m2;
        std::vector<uint64_t> inner_fp(p.t * p.m1 + (p.k2 ? p.m2 : 0));
        std::vector<uint64_t> inner_raw((p.t * p.m1) * p.k1 + (p.k2 ? p.m2 * p.k2 : 0));
        std::vector<uint64_t> tup(std::max<uint64_t>(p.k1, p.k2));
        std::vector<uint64_t> key(p.t + (p.k2 ? 1 : 0));
        std::vector<uint64_t> raw_key(p.k);
        std::vector<uint64_t> digits(p.t);
        size_t idx = 0;
        for (uint64_t r = 0; r < p.eta; ++r) {
            // Evaluate this repetition's collections once.
            for (uint64_t ci = 0; ci < p.t * p.m1; ++ci) {
                for (uint64_t j = 0; j < p.k1; ++j) {
                    tup[j] = fns_[idx++](x);
                    ++evals;
                }
                if (fps) inner_fp[ci] = fingerprint({tup.data(), p.k1}, fp_seed_);
                if (raw) std::copy_n(tup.data(), p.k1, inner_raw.data() + ci * p.k1);
            }
            if (p.k2 != 0) {
                for (uint64_t j2 = 0; j2 < p.m2; ++j2) {
                    for (uint64_t j = 0; j < p.k2; ++j) {
                        tup[j] = fns_[idx++](x);
                        ++evals;
                    }
                    if (fps) inner_fp[p.t * p.m1 + j2] = fingerprint({tup.data(), p.k2}, fp_seed_);
                    if (raw) {
                        std::copy_n(tup.data(), p.k2,
                                    inner_raw.data() + p.t * p.m1 * p.k1 + j2 * p.k2);
                    }
                }
            }
            // All t-tuples plus the trailing collection, last index fastest.
            std::fill(digits.begin(), digits.end(), 0);
            for (;;) {
                for (uint64_t j2 = 0; j2 < m2_eff; ++j2) {
                    if (fps) {
                        for (uint64_t c = 0; c < p.t; ++c) {
                            key[c] = inner_fp[c * p.m1 + digits[c]];
                        }
                        if (p.k2) key[p.t] = inner_fp[p.t * p.m1 + j2];
                        fps->push_back(fingerprint(key, fp_seed_));
                    }
                    if (raw) {
                        uint64_t w = 0;
                        for (uint64_t c = 0; c < p.t; ++c) {
                            const uint64_t* src =
                                inner_raw.data() + (c * p.m1 + digits[c]) * p.k1;
                            std::copy_n(src, p.k1, raw_key.data() + w);
                            w += p.k1;
                        }
                        if (p.k2) {
                            const uint64_t* src =
                                inner_raw.data() + p.t * p.m1 * p.k1 + j2 * p.k2;
                            std::copy_n(src, p.k2, raw_key.data() + w);
                        }
                        raw->insert(raw->end(), raw_key.begin(), raw_key.end());
                    }
                }
                uint64_t c = p.t;
                while (c > 0 && ++digits[c - 1] == p.m1) digits[--c] = 0;
                if (c == 0) break;
            }
        }
    }

    void eval_dkt(const Point& x, std::vector<uint64_t>* fps, std::vector<uint64_t>* raw,
                  uint64_t& evals) const {
        const auto& p = std::get<DktParams>(params_);
        std::vector<uint64_t> bank(p.k * p.m);
        for (uint64_t i = 0; i < bank.size(); ++i) {
            bank[i] = fns_[i](x);
            ++evals;
        }
        std::vector<uint64_t> tup(p.k);
        for (uint64_t l = 0; l < p.L; ++l) {
            for (uint64_t i = 0; i < p.k; ++i) {
                tup[i] = bank[i * p.m + sampled_[i * p.L + l]];
            }
            emit(fps, raw, tup);
        }
    }

    void eval_hybrid(const Point& x, std::vector<uint64_t>* fps, std::vector<uint64_t>* raw,
                     uint64_t& evals) const {
        const auto& p = std::get<HybridParams>(params_);
        std::vector<uint64_t> bank(fns_.size());
        for (uint64_t i = 0; i < bank.size(); ++i) {
            bank[i] = fns_[i](x);
            ++evals;
        }
        const uint64_t* bank2 = bank.data() + p.k1 * p.m1;
        const uint32_t* sampled2 = sampled_.data() + p.k1 * p.L1;
        // Inner keys of the two DKT collections.
        std::vector<uint64_t> tup1(p.k1), keys1, tup2(std::max<uint64_t>(p.k2, 1)), keys2;
        std::vector<uint64_t> raw1, raw2;
        keys1.reserve(p.L1);
        if (raw) raw1.reserve(p.L1 * p.k1);
        for (uint64_t l = 0; l < p.L1; ++l) {
            for (uint64_t i = 0; i < p.k1; ++i) {
                tup1[i] = bank.data()[i * p.m1 + sampled_[i * p.L1 + l]];
            }
            if (fps) keys1.push_back(fingerprint(tup1, fp_seed_));
            if (raw) raw1.insert(raw1.end(), tup1.begin(), tup1.end());
        }
        const uint64_t const2 = detail::mix64(fp_seed_ ^ 0x9d8f3c1b5e7a2460ull);
        keys2.reserve(p.L2);
        if (raw) raw2.reserve(p.L2 * p.k2);
        for (uint64_t l = 0; l < p.L2; ++l) {
            if (p.k2 == 0) {
                if (fps) keys2.push_back(const2);
                continue;
            }
            for (uint64_t i = 0; i < p.k2; ++i) {
                tup2[i] = bank2[i * p.m2 + sampled2[i * p.L2 + l]];
            }
            if (fps) keys2.push_back(fingerprint({tup2.data(), p.k2}, fp_seed_));
            if (raw) raw2.insert(raw2.end(), tup2.data(), tup2.data() + p.k2);
        }
        uint64_t pair[2];
        for (uint64_t i = 0; i < p.L1; ++i) {
            for (uint64_t j = 0; j < p.L2; ++j) {
                if (fps) {
                    pair[0] = keys1[i];
                    pair[1] = keys2[j];
                    fps->push_back(fingerprint(pair, fp_seed_));
                }
                if (raw) {
                    raw->insert(raw->end(), raw1.begin() + i * p.k1,
                                raw1.begin() + (i + 1) * p.k1);
                    raw->insert(raw->end(), raw2.begin() + j * p.k2,
                                raw2.begin() + (j + 1) * p.k2);
                }
            }
        }
    }

    Family family_;
    SchemeParams params_;
    uint64_t seed_;
    uint64_t fp_seed_;
    uint64_t L_ = 0;
    uint64_t key_width_ = 0;
    std::vector<typename Family::Fn> fns_;
    std::vector<PairwiseHash> samplers_;
    std::vector<uint32_t> sampled_;  // precomputed f_i(l) tables
};

template <typename Family>
HashSource<Family> build_source(Family family, const SchemeParams& params, uint64_t seed) {
    return HashSource<Family>(std::move(family), params, seed);
}

}  // namespace lshx
