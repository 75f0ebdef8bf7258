#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lshx/schemes.hpp"

namespace lshx {

/// rho = ln(1/p1) / ln(1/p2), the exponent governing query cost n^rho.
double rho(double p1, double p2);

/// One calculator row: exact hash-function and lookup counts for a scheme at
/// (n, p1, p2). L and H are exact integers (errors beyond 2^1024); aux holds
/// the scheme's free parameter (t, tau or eps).
struct CountRow {
    std::string scheme;
    uint64_t n = 0;
    double p1 = 0.0;
    double p2 = 0.0;
    uint64_t k = 0;
    std::string aux;
    mpz_class L;
    mpz_class H;
    double log2_h = 0.0;
};

/// Exact counts for one scheme. p2 = p1 is allowed here (the k formula only
/// needs p2 <= p1); overrides may pin t (ai) or eps (dkt).
CountRow scheme_counts(SchemeKind kind, uint64_t n, double p1, double p2,
                       const DeriveOverrides& overrides = {});

/// DKT applied to the powered family H^tau, taking the better of tau = 1 and
/// tau = ceil(1/ln(1/p1)).
CountRow corner_counts(uint64_t n, double p1, double p2);

/// Rows for im, ai (t = argmin H), dkt and corner-dkt across a p2 grid.
std::vector<CountRow> figure_table(uint64_t n, double p1, std::span<const double> p2_grid);

/// CSV with header scheme,n,p1,p2,k,aux,L,H,log2H (RFC 4180 quoting).
void write_csv(std::ostream& out, std::span<const CountRow> rows);

}  // namespace lshx
