#pragma once

#include <cstdint>
#include <gmpxx.h>

namespace lshx::detail {

// Exact and interval-certified arithmetic for parameter derivation. Doubles
// are dyadic rationals, so powers and ceilings of rational expressions are
// computed exactly in GMP; expressions involving ln(...) or e are evaluated
// as MPFR intervals with directed rounding, escalating precision until the
// ceiling (or comparison) is certain. Values beyond 2^1024 are rejected.

inline constexpr uint64_t k_search_limit = uint64_t(1) << 20;

/// Exact rational value of a double.
mpq_class rational_of(double x);

/// Exact q^k.
mpq_class pow_q(const mpq_class& q, uint64_t k);

/// Exact ceil of a rational.
mpz_class ceil_q(const mpq_class& q);

/// Least j >= 1 with p^j <= 1/n. Equals ceil(log n / log(1/p)), with exact
/// handling of the integral-tie case. Throws when j would exceed the search
/// limit.
uint64_t smallest_power_index(const mpq_class& p, uint64_t n);

/// ceil(mult * ln2 / x), x > 0 rational.
mpz_class ceil_ln2_over_q(const mpq_class& x, unsigned mult = 1);

/// ceil(num / ln(1 + eps)), num >= 0 and eps > 0 rational.
mpz_class ceil_q_over_ln1p(const mpq_class& num, const mpq_class& eps);

/// ceil(1 / ln(1/p)), p in (0,1).
uint64_t ceil_inv_ln_inv(double p);

struct EtaResult {
    mpz_class eta;
    double phi;
};

/// Tensoring repetition count: phi = (1-(1-a)^m1)^t * (1-(1-b)^m2) and
/// eta = ceil(ln2 / phi), where a = p1^k1 and b = p1^k2 exactly.
EtaResult ai_eta(const mpq_class& a, const mpz_class& m1, uint64_t t,
                 const mpq_class& b, const mpz_class& m2);

/// ceil(8 * ln(4n) / den), den > 0 rational (den = 64 * (p1-p2)^2 yields the
/// sketch word count).
mpz_class ceil_8ln4n_over(uint64_t n, const mpq_class& den);

/// Certified L <= 16 e / p1k.
bool leq_16e_over(const mpz_class& lhs, const mpq_class& p1k);

/// Certified (1 - p1k)^L <= 1/2.
bool pow_one_minus_leq_half(const mpq_class& p1k, const mpz_class& L);

/// log2 of a positive big integer, rounded to nearest double.
double log2_of(const mpz_class& v);

}  // namespace lshx::detail
