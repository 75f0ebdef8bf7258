#include "lshx/detail/param_math.hpp"

#include <stdexcept>
#include <string>

#include "lshx/detail/xprec.hpp"
#include "lshx/schemes.hpp"
#include "lshx/sketch.hpp"

namespace lshx::detail {

namespace {

mpq_class probability_of(double p, const char* what) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie strictly between 0 and 1");
    }
    return rational_of(p);
}

void check_cap(const mpz_class& v, const char* what) {
    if (mpz_sizeinbase(v.get_mpz_t(), 2) > 1025) {
        throw std::invalid_argument(std::string("parameters out of range: ") + what +
                                    " exceeds 2^1024");
    }
}

}  // namespace

uint64_t narrow_u64(const mpz_class& v, const char* what) {
    if (v < 0 || !v.fits_ulong_p()) {
        throw std::invalid_argument(std::string("parameters out of range: ") + what +
                                    " does not fit a machine word");
    }
    return v.get_ui();
}

uint64_t derive_k_exact(uint64_t n, double p2) {
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    return smallest_power_index(probability_of(p2, "p2"), n);
}

BigIm im_big(uint64_t k, double p1) {
    if (k == 0) throw std::invalid_argument("k must be positive");
    mpq_class q = probability_of(p1, "p1");
    BigIm r;
    r.k = k;
    r.L = ceil_ln2_over_q(pow_q(q, k));
    r.H = r.L * mpz_class(static_cast<unsigned long>(k));
    check_cap(r.L, "L");
    check_cap(r.H, "H");
    return r;
}

namespace {

BigAi ai_for_t(uint64_t k, const mpq_class& p1, uint64_t t) {
    BigAi r;
    r.t = t;
    r.k = k;
    r.k1 = k / t;
    r.k2 = k - t * r.k1;
    mpq_class a = pow_q(p1, r.k1);
    mpq_class b = pow_q(p1, r.k2);
    // m1 = ceil(1 / (t * p1^k1)), m2 = ceil(1 / p1^k2)
    r.m1 = ceil_q(1 / (t * a));
    r.m2 = ceil_q(1 / b);
    check_cap(r.m1, "m1");
    EtaResult eta = ai_eta(a, r.m1, t, b, r.m2);
    r.eta = eta.eta;
    r.phi = eta.phi;
    mpz_class m1t;
    mpz_pow_ui(m1t.get_mpz_t(), r.m1.get_mpz_t(), static_cast<unsigned long>(t));
    check_cap(m1t, "L");
    r.L = r.eta * m1t * r.m2;
    r.H = r.eta * (r.m1 * mpz_class(static_cast<unsigned long>(r.k1 * t)) +
                   r.m2 * mpz_class(static_cast<unsigned long>(r.k2)));
    check_cap(r.L, "L");
    check_cap(r.H, "H");
    return r;
}

}  // namespace

BigAi ai_big(uint64_t k, double p1, std::optional<uint64_t> t_override) {
    if (k == 0) throw std::invalid_argument("k must be positive");
    mpq_class q = probability_of(p1, "p1");
    if (t_override) {
        if (*t_override == 0 || *t_override > k) {
            throw std::invalid_argument("ai: t must lie in [1, k]");
        }
        return ai_for_t(k, q, *t_override);
    }
    // t = argmin H over t = 1..k; ties break toward smaller t.
    std::optional<BigAi> best;
    for (uint64_t t = 1; t <= k; ++t) {
        try {
            BigAi cand = ai_for_t(k, q, t);
            if (!best || cand.H < best->H) best = std::move(cand);
        } catch (const std::invalid_argument&) {
            // This t overflows the 2^1024 cap; other choices may not.
        }
    }
    if (!best) throw std::invalid_argument("parameters out of range: every tensoring t overflows");
    return *best;
}

BigDkt dkt_big(uint64_t k, double p1, double eps) {
    if (k == 0) throw std::invalid_argument("k must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("dkt: eps must be positive");
    mpq_class q = probability_of(p1, "p1");
    BigDkt r;
    r.k = k;
    r.eps = eps;
    // m = max(ceil(5k/p1), Lemma-3 minimum at eps); at eps = 1/4 the first
    // term always dominates, reproducing the Theorem 9 preset exactly.
    mpz_class m_thm9 = ceil_q(mpq_class(5 * mpz_class(static_cast<unsigned long>(k))) / q);
    mpq_class lemma3_num = (1 - q) / q * mpz_class(static_cast<unsigned long>(k));
    mpz_class m_lemma3 = ceil_q_over_ln1p(lemma3_num, rational_of(eps));
    r.m = m_thm9 > m_lemma3 ? m_thm9 : m_lemma3;
    r.L = ceil_ln2_over_q(pow_q(q, k), 2);
    r.H = mpz_class(static_cast<unsigned long>(k)) * r.m;
    check_cap(r.m, "m");
    check_cap(r.L, "L");
    check_cap(r.H, "H");
    return r;
}

BigHybrid hybrid_big(uint64_t k, double p1, bool sketching) {
    if (k == 0) throw std::invalid_argument("k must be positive");
    mpq_class q = probability_of(p1, "p1");
    BigHybrid r;
    r.k = k;
    r.k1 = (k + 1) / 2;
    r.k2 = k / 2;
    r.eps = dkt_eps_hybrid;
    // L_i = ceil(c (1/p1)^{k_i}); c doubles from 6 to 12 when the sketch
    // failure budget is in play.
    unsigned c = sketching ? 12 : 6;
    mpq_class inv = 1 / q;
    r.L1 = ceil_q(c * pow_q(inv, r.k1));
    r.L2 = ceil_q(c * pow_q(inv, r.k2));
    mpq_class eps_q(1, 6);
    mpq_class ratio = (1 - q) / q;
    r.m1 = ceil_q_over_ln1p(ratio * mpz_class(static_cast<unsigned long>(r.k1)), eps_q);
    if (r.m1 == 0) r.m1 = 1;
    r.m2 = r.k2 == 0 ? mpz_class(1)
                     : ceil_q_over_ln1p(ratio * mpz_class(static_cast<unsigned long>(r.k2)), eps_q);
    if (r.m2 == 0) r.m2 = 1;
    r.L = r.L1 * r.L2;
    r.H = mpz_class(static_cast<unsigned long>(r.k1)) * r.m1 +
          mpz_class(static_cast<unsigned long>(r.k2)) * r.m2;
    check_cap(r.L, "L");
    check_cap(r.H, "H");
    return r;
}

BigCorner corner_big(uint64_t n, double p1, double p2) {
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    mpq_class q1 = probability_of(p1, "p1");
    mpq_class q2 = probability_of(p2, "p2");
    if (q2 > q1) throw std::invalid_argument("need p2 <= p1");
    uint64_t tau_star = ceil_inv_ln_inv(p1);
    if (tau_star > k_search_limit) {
        throw std::invalid_argument("parameters out of range: tau exceeds search limit");
    }
    std::optional<BigCorner> best;
    for (uint64_t tau : {uint64_t(1), tau_star}) {
        if (best && best->tau == tau) continue;
        mpq_class p1t = pow_q(q1, tau);
        mpq_class p2t = pow_q(q2, tau);
        BigCorner cand;
        cand.tau = tau;
        cand.k = smallest_power_index(p2t, n);
        cand.m = ceil_q(mpq_class(5 * mpz_class(static_cast<unsigned long>(cand.k))) / p1t);
        cand.H = mpz_class(static_cast<unsigned long>(tau)) *
                 mpz_class(static_cast<unsigned long>(cand.k)) * cand.m;
        cand.L = ceil_ln2_over_q(pow_q(p1t, cand.k), 2);
        check_cap(cand.H, "H");
        check_cap(cand.L, "L");
        if (!best || cand.H < best->H) best = std::move(cand);
    }
    return *best;
}

}  // namespace lshx::detail

namespace lshx {

using detail::narrow_u64;

ImParams im_params_for_k(uint64_t k, double p1) {
    detail::BigIm big = detail::im_big(k, p1);
    return ImParams{big.k, narrow_u64(big.L, "L")};
}

AiParams ai_params_for_k(uint64_t k, double p1, std::optional<uint64_t> t) {
    detail::BigAi big = detail::ai_big(k, p1, t);
    return AiParams{big.t,
                    big.k,
                    big.k1,
                    big.k2,
                    narrow_u64(big.m1, "m1"),
                    narrow_u64(big.m2, "m2"),
                    narrow_u64(big.eta, "eta"),
                    big.phi,
                    narrow_u64(big.L, "L")};
}

DktParams dkt_params_for_k(uint64_t k, double p1, double eps) {
    detail::BigDkt big = detail::dkt_big(k, p1, eps);
    uint64_t L = narrow_u64(big.L, "L");
    if (L > uint64_t(1) << 63) {
        throw std::invalid_argument("parameters out of range: dkt L exceeds 2^63");
    }
    return DktParams{big.k, narrow_u64(big.m, "m"), L, big.eps};
}

HybridParams hybrid_params_for_k(uint64_t k, double p1, bool sketching) {
    detail::BigHybrid big = detail::hybrid_big(k, p1, sketching);
    return HybridParams{big.k,
                        big.k1,
                        big.k2,
                        narrow_u64(big.m1, "m1"),
                        narrow_u64(big.m2, "m2"),
                        narrow_u64(big.L1, "L1"),
                        narrow_u64(big.L2, "L2"),
                        big.eps};
}

SchemeParams derive_params(SchemeKind kind, uint64_t n, const Sensitivity& s,
                           const DeriveOverrides& overrides) {
    if (n < 2) throw std::invalid_argument("derive_params: n must be at least 2");
    uint64_t k = detail::derive_k_exact(n, s.p2);
    switch (kind) {
        case SchemeKind::im: return im_params_for_k(k, s.p1);
        case SchemeKind::ai: return ai_params_for_k(k, s.p1, overrides.tensor_t);
        case SchemeKind::dkt:
            return dkt_params_for_k(k, s.p1, overrides.dkt_eps.value_or(dkt_eps_theorem9));
        case SchemeKind::hybrid: return hybrid_params_for_k(k, s.p1, overrides.sketching);
    }
    throw std::invalid_argument("unknown scheme kind");
}

SketchParams derive_sketch_params(uint64_t n, double p1, double p2) {
    if (n == 0) throw std::invalid_argument("derive_sketch_params: n must be positive");
    if (!(p1 > p2)) throw std::invalid_argument("sketching requires a probability gap");
    if (!(p2 >= 0.0) || !(p1 <= 1.0)) {
        throw std::invalid_argument("probabilities must lie in [0, 1]");
    }
    mpq_class gap = detail::rational_of(p1) - detail::rational_of(p2);
    // words = ceil((8 ln(4n) / gap^2) / 64); b = 64 * words so that the
    // per-point failure e^{-b gap^2 / 8} is at most 1/(4n).
    mpz_class words = detail::ceil_8ln4n_over(n, 64 * gap * gap);
    uint64_t b = detail::mul_checked(narrow_u64(words, "sketch length"), 64, "sketch length");
    // lambda = (1+p2)/2 + (p1-p2)/4, theta = floor((1-lambda) b), both exact.
    mpq_class lambda = (1 + detail::rational_of(p2)) / 2 + gap / 4;
    mpq_class slack = (1 - lambda) * mpz_class(static_cast<unsigned long>(b));
    mpz_class theta;
    mpz_fdiv_q(theta.get_mpz_t(), mpq_numref(slack.get_mpq_t()), mpq_denref(slack.get_mpq_t()));
    return SketchParams{b, lambda.get_d(), narrow_u64(theta, "theta")};
}

SketchParams derive_sketch_params(uint64_t n, const Sensitivity& s) {
    return derive_sketch_params(n, s.p1, s.p2);
}

}  // namespace lshx
