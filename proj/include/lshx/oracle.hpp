#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lshx/detail/rng.hpp"
#include "lshx/schemes.hpp"

namespace lshx {

/// Monte-Carlo frequency estimate with its binomial standard error.
struct McEstimate {
    uint64_t trials = 0;
    uint64_t successes = 0;
    double frequency = 0.0;
    double stderr_est = 0.0;
};

inline McEstimate make_estimate(uint64_t successes, uint64_t trials) {
    if (trials == 0) throw std::invalid_argument("estimate requires at least one trial");
    McEstimate e;
    e.trials = trials;
    e.successes = successes;
    e.frequency = double(successes) / double(trials);
    e.stderr_est = std::sqrt(e.frequency * (1.0 - e.frequency) / double(trials));
    return e;
}

/// Exact ground truth: every point of P within distance r of q, sorted by
/// (distance, id).
template <typename Point, typename Dist>
std::vector<std::pair<double, uint32_t>> linear_scan(std::span<const Point> points,
                                                     const Point& q, double r, Dist&& dist) {
    std::vector<std::pair<double, uint32_t>> hits;
    for (uint32_t id = 0; id < points.size(); ++id) {
        double d = dist(q, points[id]);
        if (d <= r) hits.emplace_back(d, id);
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

/// Estimates Pr[h(x) = h(y)] over seeded draws from the family. Deterministic
/// per (seed, trials); trial i uses the seed derived from (seed, i), so the
/// estimate is schedule-independent.
template <typename F>
McEstimate mc_collision_prob(const F& family, const typename F::Point& x,
                             const typename F::Point& y, uint64_t trials, uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("mc_collision_prob: trials must be positive");
    uint64_t successes = 0;
    for (uint64_t t = 0; t < trials; ++t) {
        auto fn = family.sample(detail::derive_seed(seed, 101, t));
        if (fn(x) == fn(y)) ++successes;
    }
    return make_estimate(successes, trials);
}

/// Estimates Pr[exists l: g_l(x) = g_l(y)] over independent builds of the
/// scheme, comparing raw key tuples rather than fingerprints.
template <typename F>
McEstimate mc_scheme_success(const F& family, const SchemeParams& params,
                             const typename F::Point& x, const typename F::Point& y,
                             uint64_t trials, uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("mc_scheme_success: trials must be positive");
    uint64_t successes = 0;
    std::vector<uint64_t> kx, ky;
    for (uint64_t t = 0; t < trials; ++t) {
        HashSource<F> source(family, params, detail::derive_seed(seed, 102, t));
        source.raw_keys(x, kx);
        source.raw_keys(y, ky);
        uint64_t w = source.key_width();
        uint64_t L = source.table_count();
        for (uint64_t l = 0; l < L; ++l) {
            if (std::equal(kx.begin() + l * w, kx.begin() + (l + 1) * w, ky.begin() + l * w)) {
                ++successes;
                break;
            }
        }
    }
    return make_estimate(successes, trials);
}

/// Hoeffding tail for b-bit sketches at the agreement midpoint:
/// e^{-b (p1-p2)^2 / 8}.
inline double hoeffding_bound(uint64_t b, double p1, double p2) {
    if (b == 0) throw std::invalid_argument("hoeffding_bound: b must be positive");
    if (!(p1 > p2)) throw std::invalid_argument("hoeffding_bound: requires p1 > p2");
    double gap = p1 - p2;
    return std::exp(-double(b) * gap * gap / 8.0);
}

}  // namespace lshx
