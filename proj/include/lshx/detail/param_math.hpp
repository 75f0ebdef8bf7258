#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <optional>

namespace lshx::detail {

// Exact parameter derivation shared by the runtime schemes and the
// calculators. Counts are big integers here; the runtime narrows them.

struct BigIm {
    uint64_t k;
    mpz_class L, H;
};

struct BigAi {
    uint64_t t, k, k1, k2;
    mpz_class m1, m2, eta, L, H;
    double phi;
};

struct BigDkt {
    uint64_t k;
    mpz_class m, L, H;
    double eps;
};

struct BigHybrid {
    uint64_t k, k1, k2;
    mpz_class m1, m2, L1, L2, L, H;
    double eps;
};

struct BigCorner {
    uint64_t tau, k;
    mpz_class m, L, H;
};

/// k = ceil(log n / log(1/p2)), exact.
uint64_t derive_k_exact(uint64_t n, double p2);

BigIm im_big(uint64_t k, double p1);
BigAi ai_big(uint64_t k, double p1, std::optional<uint64_t> t_override);
BigDkt dkt_big(uint64_t k, double p1, double eps);
BigHybrid hybrid_big(uint64_t k, double p1, bool sketching);

/// DKT applied to the powered family H^tau, minimized over tau in {1, tau*}.
BigCorner corner_big(uint64_t n, double p1, double p2);

uint64_t narrow_u64(const mpz_class& v, const char* what);

}  // namespace lshx::detail
