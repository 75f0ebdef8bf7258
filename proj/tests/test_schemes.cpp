#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "lshx/detail/param_math.hpp"
#include "lshx/detail/xprec.hpp"
#include "lshx/families.hpp"
#include "lshx/oracle.hpp"
#include "lshx/schemes.hpp"

using namespace lshx;

namespace {

HammingPoint random_point(detail::SplitMix64& rng, uint64_t dim) {
    HammingPoint p;
    p.words.assign((dim + 63) / 64, 0);
    for (auto& w : p.words) w = rng.next();
    if (dim % 64 != 0) p.words.back() &= (uint64_t(1) << (dim % 64)) - 1;
    return p;
}

HammingPoint flip_bits(const HammingPoint& p, uint64_t dim, uint64_t count, uint64_t seed) {
    detail::SplitMix64 rng(seed);
    HammingPoint q = p;
    std::set<uint64_t> flipped;
    while (flipped.size() < count) {
        uint64_t i = rng.below(dim);
        if (flipped.insert(i).second) q.words[i >> 6] ^= uint64_t(1) << (i & 63);
    }
    return q;
}

}  // namespace

TEST_CASE("derive_params: im at n = 2^30") {
    // p1 = p2 = 0.5 is not a valid Sensitivity, so pin k directly.
    ImParams p = im_params_for_k(30, 0.5);
    CHECK(p.k == 30);
    CHECK(p.L == 744261118);  // ceil(ln2 * 2^30)

    // through the n-derivation: p2 = 0.5, n = 2^30 gives exactly k = 30
    SchemeParams sp = derive_params(SchemeKind::im, uint64_t(1) << 30,
                                    Sensitivity(1, 2, 0.75, 0.5));
    CHECK(std::get<ImParams>(sp).k == 30);
}

TEST_CASE("derive_params: dkt at n = 2^30") {
    DktParams p = dkt_params_for_k(30, 0.5);
    CHECK(p.k == 30);
    CHECK(p.m == 300);
    CHECK(p.k * p.m == 9000);
    CHECK(p.L == 1488522236);  // ceil(2 ln2 * 2^30)
    CHECK(p.eps == doctest::Approx(0.25));
}

TEST_CASE("derive_params: ai at k = 30, t = 6 (the sqrt(k) choice)") {
    AiParams p = ai_params_for_k(30, 0.5, 6);
    CHECK(p.t == 6);
    CHECK(p.k1 == 5);
    CHECK(p.k2 == 0);
    CHECK(p.m1 == 6);
    CHECK(p.m2 == 1);
    CHECK(p.eta * (p.m1 * p.k1 * p.t + p.m2 * p.k2) == function_count(SchemeParams(p)));
}

TEST_CASE("derive_params: hybrid at n = 2^10, p1 = 0.5") {
    HybridParams p = hybrid_params_for_k(10, 0.5);
    CHECK(p.k == 10);
    CHECK(p.k1 == 5);
    CHECK(p.k2 == 5);
    CHECK(p.L1 == 192);
    CHECK(p.L2 == 192);
    CHECK(p.L1 * p.L2 == 36864);
    CHECK(p.m1 == 33);  // ceil(5 / ln(7/6))
    CHECK(p.m2 == 33);
    CHECK(function_count(SchemeParams(p)) == 330);

    // doubled L_i when the sketch failure budget applies
    HybridParams ps = hybrid_params_for_k(10, 0.5, true);
    CHECK(ps.L1 == 384);
    CHECK(ps.L2 == 384);
}

TEST_CASE("derive_params: n = 2 gives k = 1") {
    SchemeParams sp = derive_params(SchemeKind::im, 2, Sensitivity(1, 2, 0.5, 0.25));
    CHECK(std::get<ImParams>(sp).k == 1);
    CHECK_THROWS_AS(derive_params(SchemeKind::im, 1, Sensitivity(1, 2, 0.5, 0.25)),
                    std::invalid_argument);
}

TEST_CASE("ai with t = 1 degenerates to eta banks from H^k") {
    AiParams p = ai_params_for_k(12, 0.5, 1);
    CHECK(p.k1 == 12);
    CHECK(p.k2 == 0);
    CHECK(p.m2 == 1);
    CHECK(p.L == p.eta * p.m1);
}

TEST_CASE("dkt_failure_bound exact values") {
    CHECK(dkt_failure_bound(6.0, 1.0 / 6.0) == doctest::Approx(0.25).epsilon(1e-12));
    double mu = 2.0 * std::log(2.0);
    double b = dkt_failure_bound(mu, 0.25);
    CHECK(b == doctest::Approx(0.4926759557).epsilon(1e-9));
    CHECK(b <= 0.5);
    // mu -> infinity tends to eps/(1+eps)
    CHECK(dkt_failure_bound(1e12, 0.25) == doctest::Approx(0.2).epsilon(1e-9));
    CHECK_THROWS_AS(dkt_failure_bound(0.0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(dkt_failure_bound(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("build_source stores exactly H functions") {
    BitSamplingFamily fam(64);

    DktParams dkt{15, 150, 64, dkt_eps_theorem9};
    auto dsrc = build_source(fam, SchemeParams(dkt), 1);
    CHECK(dsrc.function_count() == 2250);  // k * m

    ImParams im{4, 10};
    auto isrc = build_source(fam, SchemeParams(im), 1);
    CHECK(isrc.function_count() == 40);  // L * k

    AiParams ai = ai_params_for_k(12, 0.75, 3);
    auto asrc = build_source(fam, SchemeParams(ai), 1);
    CHECK(asrc.function_count() == ai.eta * (ai.m1 * ai.k1 * ai.t + ai.m2 * ai.k2));
    CHECK(asrc.table_count() == ai.L);

    HybridParams hy = hybrid_params_for_k(8, 0.75);
    auto hsrc = build_source(fam, SchemeParams(hy), 1);
    CHECK(hsrc.function_count() == hy.k1 * hy.m1 + hy.k2 * hy.m2);
    CHECK(hsrc.table_count() == hy.L1 * hy.L2);
}

TEST_CASE("same (kind, params, seed) is deterministic; seeds differ") {
    BitSamplingFamily fam(64);
    detail::SplitMix64 rng(5);
    HammingPoint x = random_point(rng, 64);
    for (SchemeParams params :
         {SchemeParams(ImParams{3, 7}), SchemeParams(dkt_params_for_k(5, 0.75)),
          SchemeParams(ai_params_for_k(6, 0.75, 2)),
          SchemeParams(hybrid_params_for_k(6, 0.75))}) {
        auto s1 = build_source(fam, params, 99);
        auto s2 = build_source(fam, params, 99);
        CHECK(s1.evaluate_all(x) == s2.evaluate_all(x));
        auto s3 = build_source(fam, params, 100);
        CHECK(s1.evaluate_all(x) != s3.evaluate_all(x));
    }
}

TEST_CASE("evaluate_all counts base evaluations per the H formula") {
    BitSamplingFamily fam(64);
    detail::SplitMix64 rng(6);
    HammingPoint x = random_point(rng, 64);
    for (SchemeParams params :
         {SchemeParams(ImParams{3, 7}), SchemeParams(dkt_params_for_k(5, 0.75)),
          SchemeParams(ai_params_for_k(6, 0.75, 2)),
          SchemeParams(hybrid_params_for_k(6, 0.75))}) {
        auto src = build_source(fam, params, 7);
        std::vector<uint64_t> fps;
        uint64_t evals = 0;
        src.evaluate_all(x, fps, evals);
        CHECK(evals == src.evals_per_query());
        CHECK(fps.size() == src.table_count());
    }
}

TEST_CASE("dkt keys match a straight-line reference reimplementation") {
    // k = 3, m = 5, L = 8, fixed seed: rebuild g_l by hand from the same
    // drawn functions and pairwise hashes.
    BitSamplingFamily fam(32);
    DktParams p{3, 5, 8, dkt_eps_theorem9};
    const uint64_t seed = 424242;
    auto src = build_source(fam, SchemeParams(p), seed);

    detail::SplitMix64 rng(77);
    HammingPoint x = random_point(rng, 32);

    // reference: independently re-derive the bank and samplers from the seed
    // schedule (lane 1 = functions, lane 2 = samplers, lane 3 = fingerprints)
    std::vector<BitSamplingFamily::Fn> bank;
    for (uint64_t i = 0; i < p.k * p.m; ++i) {
        bank.push_back(fam.sample(detail::derive_seed(seed, 1, i)));
    }
    std::vector<PairwiseHash> samplers;
    for (uint64_t i = 0; i < p.k; ++i) {
        samplers.emplace_back(p.L, p.m, detail::derive_seed(seed, 2, i));
    }
    uint64_t fp_seed = detail::derive_seed(seed, 3, 0);
    std::vector<uint64_t> expected;
    for (uint64_t l = 0; l < p.L; ++l) {
        std::vector<uint64_t> tup(p.k);
        for (uint64_t i = 0; i < p.k; ++i) {
            tup[i] = bank[i * p.m + samplers[i](l)](x);
        }
        expected.push_back(fingerprint(tup, fp_seed));
    }
    CHECK(src.evaluate_all(x) == expected);

    std::vector<uint64_t> raw;
    src.raw_keys(x, raw);
    CHECK(raw.size() == p.L * p.k);
    for (uint64_t l = 0; l < p.L; ++l) {
        std::vector<uint64_t> tup(raw.begin() + l * p.k, raw.begin() + (l + 1) * p.k);
        CHECK(fingerprint(tup, fp_seed) == expected[l]);
    }
}

TEST_CASE("hybrid pair-keys collide iff both inner keys collide") {
    BitSamplingFamily fam(16);
    HybridParams p = hybrid_params_for_k(6, 0.75);
    auto src = build_source(fam, SchemeParams(p), 13);

    detail::SplitMix64 rng(14);
    HammingPoint x = random_point(rng, 16);
    HammingPoint y = flip_bits(x, 16, 4, 15);

    std::vector<uint64_t> rx, ry;
    src.raw_keys(x, rx);
    src.raw_keys(y, ry);
    uint64_t w = src.key_width();
    REQUIRE(w == p.k1 + p.k2);
    for (uint64_t i = 0; i < p.L1; ++i) {
        for (uint64_t j = 0; j < p.L2; ++j) {
            uint64_t row = i * p.L2 + j;
            bool first = std::equal(rx.begin() + row * w, rx.begin() + row * w + p.k1,
                                    ry.begin() + row * w);
            bool second = std::equal(rx.begin() + row * w + p.k1, rx.begin() + (row + 1) * w,
                                     ry.begin() + row * w + p.k1);
            bool pair_collides = std::equal(rx.begin() + row * w, rx.begin() + (row + 1) * w,
                                            ry.begin() + row * w);
            CHECK(pair_collides == (first && second));
            // the halves are shared across the grid: row (i, j) holds
            // collection-1 key i and collection-2 key j
            uint64_t row0 = i * p.L2;
            CHECK(std::equal(rx.begin() + row * w, rx.begin() + row * w + p.k1,
                             rx.begin() + row0 * w));
        }
    }
}

TEST_CASE("dkt no-collision frequency is below the corrected Lemma 3 bound") {
    // pair with exact collision probability p1 = 0.75 (d = 16, distance 4)
    const uint64_t d = 16, dist = 4, trials = 2000;
    BitSamplingFamily fam(d);
    double p1 = 0.75;
    DktParams p = dkt_params_for_k(6, p1);
    detail::SplitMix64 rng(31);
    HammingPoint x = random_point(rng, d);
    HammingPoint y = flip_bits(x, d, dist, 32);

    McEstimate est = mc_scheme_success(fam, SchemeParams(p), x, y, trials, 33);
    double mu = double(p.L) * std::pow(p1, double(p.k));
    double bound = dkt_failure_bound(mu, p.eps);
    double fail_freq = 1.0 - est.frequency;
    CHECK(fail_freq <= bound + 3.0 * est.stderr_est);
}

TEST_CASE("im success frequency at p = p1 is at least 1/2") {
    const uint64_t d = 16, dist = 4, trials = 2000;
    BitSamplingFamily fam(d);
    ImParams p = im_params_for_k(6, 0.75);
    detail::SplitMix64 rng(41);
    HammingPoint x = random_point(rng, d);
    HammingPoint y = flip_bits(x, d, dist, 42);
    McEstimate est = mc_scheme_success(fam, SchemeParams(p), x, y, trials, 43);
    CHECK(est.frequency >= 0.5 - 3.0 * est.stderr_est);
}

TEST_CASE("hybrid success frequency at p = p1 is at least 3/4 per the union bound") {
    const uint64_t d = 16, dist = 4, trials = 2000;
    BitSamplingFamily fam(d);
    HybridParams p = hybrid_params_for_k(6, 0.75);
    detail::SplitMix64 rng(51);
    HammingPoint x = random_point(rng, d);
    HammingPoint y = flip_bits(x, d, dist, 52);
    McEstimate est = mc_scheme_success(fam, SchemeParams(p), x, y, trials, 53);
    // each collection fails with probability at most 1/4 at eps = 1/6
    CHECK(est.frequency >= 0.75 - 3.0 * est.stderr_est);
}

TEST_CASE("ai L stays below 16e / p1^k across a grid") {
    for (uint64_t n : {uint64_t(1) << 10, uint64_t(1) << 20}) {
        for (double p1 : {0.1, 0.5, 0.9}) {
            for (double frac : {0.25, 0.5, 0.9}) {
                double p2 = p1 * frac;
                uint64_t k = detail::derive_k_exact(n, p2);
                detail::BigAi big = detail::ai_big(k, p1, std::nullopt);
                CHECK(detail::leq_16e_over(big.L, detail::pow_q(detail::rational_of(p1), k)));
            }
        }
    }
}

TEST_CASE("dkt L guard: rejects L beyond 2^63") {
    // k large enough that L = ceil(2 ln2 / p1^k) overflows the sampler domain
    CHECK_THROWS_AS(dkt_params_for_k(70, 0.5), std::invalid_argument);
}

TEST_CASE("dkt m honors the Lemma 3 precondition when eps is overridden") {
    // at tiny eps the Lemma 3 minimum exceeds ceil(5k/p1)
    double eps = 0.01;
    DktParams p = dkt_params_for_k(10, 0.5, eps);
    double lemma3 = (1.0 - 0.5) / 0.5 * 10.0 / std::log1p(eps);
    CHECK(double(p.m) >= lemma3);
    CHECK(p.m >= 100);  // never below the Theorem 9 preset
}
