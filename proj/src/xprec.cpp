#include "lshx/detail/xprec.hpp"

#include <mpfr.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace lshx::detail {

namespace {

constexpr mpfr_prec_t start_prec = 256;
constexpr mpfr_prec_t max_prec = mpfr_prec_t(1) << 14;
constexpr long max_bits = 1024;  // calculator outputs are capped at 2^1024

struct Mpfr {
    mpfr_t v;
    explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v, prec); }
    ~Mpfr() { mpfr_clear(v); }
    Mpfr(const Mpfr&) = delete;
    Mpfr& operator=(const Mpfr&) = delete;
};

// eval(out, prec, lower) must fill a certified lower (lower=true) or upper
// bound of the target value at the given working precision.
template <typename Eval>
mpz_class certified_ceil(Eval&& eval, const char* what) {
    for (mpfr_prec_t prec = start_prec; prec <= max_prec; prec *= 2) {
        Mpfr lo(prec), hi(prec);
        eval(lo.v, prec, true);
        eval(hi.v, prec, false);
        if (!mpfr_number_p(lo.v) || !mpfr_number_p(hi.v)) continue;
        if (mpfr_cmp_ui_2exp(lo.v, 1, max_bits) > 0) {
            throw std::invalid_argument(std::string("parameters out of range: ") + what +
                                        " exceeds 2^1024");
        }
        mpz_class clo, chi;
        mpfr_get_z(clo.get_mpz_t(), lo.v, MPFR_RNDU);
        mpfr_get_z(chi.get_mpz_t(), hi.v, MPFR_RNDU);
        if (clo == chi) return clo;
    }
    throw std::runtime_error(std::string("parameters out of range: cannot certify ceiling of ") +
                             what);
}

}  // namespace

mpq_class rational_of(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("expected a finite value");
    return mpq_class(x);
}

mpq_class pow_q(const mpq_class& q, uint64_t k) {
    if (k > k_search_limit) {
        throw std::invalid_argument("parameters out of range: exponent exceeds search limit");
    }
    mpq_class r;
    mpz_pow_ui(mpq_numref(r.get_mpq_t()), mpq_numref(q.get_mpq_t()),
               static_cast<unsigned long>(k));
    mpz_pow_ui(mpq_denref(r.get_mpq_t()), mpq_denref(q.get_mpq_t()),
               static_cast<unsigned long>(k));
    return r;
}

mpz_class ceil_q(const mpq_class& q) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), mpq_numref(q.get_mpq_t()), mpq_denref(q.get_mpq_t()));
    return r;
}

uint64_t smallest_power_index(const mpq_class& p, uint64_t n) {
    if (p <= 0 || p >= 1) throw std::invalid_argument("probability must lie in (0, 1)");
    if (n < 2) throw std::invalid_argument("n must be at least 2");

    // Estimate log(n) / log(1/p) in floating point, then settle exactly.
    double est;
    {
        Mpfr num(64), den(64);
        mpfr_set_ui(num.v, static_cast<unsigned long>(n), MPFR_RNDN);
        mpfr_log(num.v, num.v, MPFR_RNDN);
        mpfr_set_q(den.v, p.get_mpq_t(), MPFR_RNDN);
        mpfr_log(den.v, den.v, MPFR_RNDN);  // negative
        mpfr_div(num.v, num.v, den.v, MPFR_RNDN);
        est = -mpfr_get_d(num.v, MPFR_RNDN);
    }
    if (!(est < double(k_search_limit))) {
        throw std::invalid_argument("parameters out of range: k exceeds search limit");
    }

    uint64_t j = est > 4.0 ? static_cast<uint64_t>(est) - 3 : 1;
    mpq_class inv_n(1, 1);
    inv_n /= mpz_class(static_cast<unsigned long>(n));
    mpq_class cur = pow_q(p, j);
    while (cur > inv_n) {
        ++j;
        cur *= p;
        if (j > k_search_limit) {
            throw std::invalid_argument("parameters out of range: k exceeds search limit");
        }
    }
    return j;
}

mpz_class ceil_ln2_over_q(const mpq_class& x, unsigned mult) {
    if (x <= 0) throw std::invalid_argument("internal: nonpositive denominator");
    return certified_ceil(
        [&](mpfr_ptr out, mpfr_prec_t prec, bool lower) {
            mpfr_rnd_t dir = lower ? MPFR_RNDD : MPFR_RNDU;
            Mpfr den(prec);
            mpfr_set_q(den.v, x.get_mpq_t(), lower ? MPFR_RNDU : MPFR_RNDD);
            mpfr_const_log2(out, dir);
            mpfr_mul_ui(out, out, mult, dir);
            mpfr_div(out, out, den.v, dir);
        },
        "L");
}

mpz_class ceil_q_over_ln1p(const mpq_class& num, const mpq_class& eps) {
    if (eps <= 0) throw std::invalid_argument("epsilon must be positive");
    if (num == 0) return 0;
    return certified_ceil(
        [&](mpfr_ptr out, mpfr_prec_t prec, bool lower) {
            mpfr_rnd_t dir = lower ? MPFR_RNDD : MPFR_RNDU;
            mpfr_rnd_t den_dir = lower ? MPFR_RNDU : MPFR_RNDD;
            mpq_class one_plus = eps + 1;
            Mpfr den(prec);
            mpfr_set_q(den.v, one_plus.get_mpq_t(), den_dir);
            mpfr_log(den.v, den.v, den_dir);
            mpfr_set_q(out, num.get_mpq_t(), dir);
            mpfr_div(out, out, den.v, dir);
        },
        "m");
}

uint64_t ceil_inv_ln_inv(double p) {
    mpq_class q = rational_of(p);
    if (q <= 0 || q >= 1) throw std::invalid_argument("probability must lie in (0, 1)");
    mpq_class inv = 1 / q;  // exact
    mpz_class r = certified_ceil(
        [&](mpfr_ptr out, mpfr_prec_t prec, bool lower) {
            mpfr_rnd_t dir = lower ? MPFR_RNDD : MPFR_RNDU;
            mpfr_rnd_t den_dir = lower ? MPFR_RNDU : MPFR_RNDD;
            Mpfr den(prec);
            mpfr_set_q(den.v, inv.get_mpq_t(), den_dir);
            mpfr_log(den.v, den.v, den_dir);
            mpfr_ui_div(out, 1, den.v, dir);
        },
        "tau");
    if (r < 1) r = 1;
    if (!r.fits_ulong_p()) throw std::invalid_argument("parameters out of range: tau");
    return r.get_ui();
}

namespace {

// phi = (1-(1-a)^m1)^t * (1-(1-b)^m2), evaluated as a directed bound.
void eval_phi(mpfr_ptr out, mpfr_prec_t prec, bool lower, const mpq_class& a,
              const mpz_class& m1, uint64_t t, const mpq_class& b, const mpz_class& m2) {
    mpfr_rnd_t inner = lower ? MPFR_RNDU : MPFR_RNDD;
    mpfr_rnd_t outer = lower ? MPFR_RNDD : MPFR_RNDU;
    mpq_class one_minus_a = 1 - a;
    mpq_class one_minus_b = 1 - b;
    Mpfr s1(prec), s2(prec);
    mpfr_set_q(s1.v, one_minus_a.get_mpq_t(), inner);
    mpfr_pow_z(s1.v, s1.v, m1.get_mpz_t(), inner);
    mpfr_ui_sub(s1.v, 1, s1.v, outer);
    if (mpfr_sgn(s1.v) < 0) mpfr_set_zero(s1.v, 1);
    mpfr_pow_ui(s1.v, s1.v, static_cast<unsigned long>(t), outer);
    mpfr_set_q(s2.v, one_minus_b.get_mpq_t(), inner);
    mpfr_pow_z(s2.v, s2.v, m2.get_mpz_t(), inner);
    mpfr_ui_sub(s2.v, 1, s2.v, outer);
    if (mpfr_sgn(s2.v) < 0) mpfr_set_zero(s2.v, 1);
    mpfr_mul(out, s1.v, s2.v, outer);
}

}  // namespace

EtaResult ai_eta(const mpq_class& a, const mpz_class& m1, uint64_t t, const mpq_class& b,
                 const mpz_class& m2) {
    EtaResult res;
    res.eta = certified_ceil(
        [&](mpfr_ptr out, mpfr_prec_t prec, bool lower) {
            mpfr_rnd_t dir = lower ? MPFR_RNDD : MPFR_RNDU;
            Mpfr phi(prec);
            eval_phi(phi.v, prec, !lower, a, m1, t, b, m2);
            if (mpfr_zero_p(phi.v)) {
                mpfr_set_inf(out, 1);
                return;
            }
            mpfr_const_log2(out, dir);
            mpfr_div(out, out, phi.v, dir);
        },
        "eta");
    Mpfr phi(128);
    eval_phi(phi.v, 128, false, a, m1, t, b, m2);
    res.phi = mpfr_get_d(phi.v, MPFR_RNDN);
    return res;
}

mpz_class ceil_8ln4n_over(uint64_t n, const mpq_class& den) {
    if (den <= 0) throw std::invalid_argument("internal: nonpositive denominator");
    return certified_ceil(
        [&](mpfr_ptr out, mpfr_prec_t prec, bool lower) {
            mpfr_rnd_t dir = lower ? MPFR_RNDD : MPFR_RNDU;
            mpfr_rnd_t den_dir = lower ? MPFR_RNDU : MPFR_RNDD;
            Mpfr d(prec), ln2(prec);
            mpfr_set_q(d.v, den.get_mpq_t(), den_dir);
            // ln(4n) = ln(n) + 2 ln 2, avoiding overflow of 4n
            mpfr_set_ui(out, static_cast<unsigned long>(n), MPFR_RNDN);
            mpfr_log(out, out, dir);
            mpfr_const_log2(ln2.v, dir);
            mpfr_mul_ui(ln2.v, ln2.v, 2, dir);
            mpfr_add(out, out, ln2.v, dir);
            mpfr_mul_ui(out, out, 8, dir);
            mpfr_div(out, out, d.v, dir);
        },
        "sketch length");
}

bool leq_16e_over(const mpz_class& lhs, const mpq_class& p1k) {
    if (p1k <= 0) throw std::invalid_argument("internal: nonpositive power");
    for (mpfr_prec_t prec = start_prec; prec <= max_prec; prec *= 2) {
        Mpfr lo(prec), hi(prec), den(prec);
        for (bool lower : {true, false}) {
            mpfr_ptr out = lower ? lo.v : hi.v;
            mpfr_rnd_t dir = lower ? MPFR_RNDD : MPFR_RNDU;
            mpfr_set_q(den.v, p1k.get_mpq_t(), lower ? MPFR_RNDU : MPFR_RNDD);
            mpfr_set_ui(out, 1, MPFR_RNDN);
            mpfr_exp(out, out, dir);  // e
            mpfr_mul_ui(out, out, 16, dir);
            mpfr_div(out, out, den.v, dir);
        }
        if (mpfr_cmp_z(lo.v, lhs.get_mpz_t()) >= 0) return true;
        if (mpfr_cmp_z(hi.v, lhs.get_mpz_t()) < 0) return false;
    }
    throw std::runtime_error("cannot certify comparison against 16e/p1^k");
}

bool pow_one_minus_leq_half(const mpq_class& p1k, const mpz_class& L) {
    mpq_class base = 1 - p1k;
    if (base < 0) throw std::invalid_argument("internal: power above one");
    if (base == 0) return true;
    for (mpfr_prec_t prec = start_prec; prec <= max_prec; prec *= 2) {
        Mpfr lo(prec), hi(prec);
        mpfr_set_q(lo.v, base.get_mpq_t(), MPFR_RNDD);
        mpfr_pow_z(lo.v, lo.v, L.get_mpz_t(), MPFR_RNDD);
        mpfr_set_q(hi.v, base.get_mpq_t(), MPFR_RNDU);
        mpfr_pow_z(hi.v, hi.v, L.get_mpz_t(), MPFR_RNDU);
        if (mpfr_cmp_d(hi.v, 0.5) <= 0) return true;
        if (mpfr_cmp_d(lo.v, 0.5) > 0) return false;
    }
    throw std::runtime_error("cannot certify comparison against 1/2");
}

double log2_of(const mpz_class& v) {
    if (v <= 0) throw std::invalid_argument("log2 of a nonpositive value");
    mpfr_prec_t prec = std::max<mpfr_prec_t>(64, mpfr_prec_t(mpz_sizeinbase(v.get_mpz_t(), 2)) + 8);
    Mpfr t(prec);
    mpfr_set_z(t.v, v.get_mpz_t(), MPFR_RNDN);
    mpfr_log2(t.v, t.v, MPFR_RNDN);
    return mpfr_get_d(t.v, MPFR_RNDN);
}

}  // namespace lshx::detail
