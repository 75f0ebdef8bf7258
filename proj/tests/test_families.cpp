#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "lshx/families.hpp"
#include "lshx/oracle.hpp"

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

TEST_CASE("sensitivity validation") {
    CHECK_NOTHROW(Sensitivity(1, 2, 0.5, 0.25));
    CHECK_THROWS_AS(Sensitivity(0, 2, 0.5, 0.25), std::invalid_argument);   // r1 = 0
    CHECK_THROWS_AS(Sensitivity(2, 2, 0.5, 0.25), std::invalid_argument);   // r1 = r2
    CHECK_THROWS_AS(Sensitivity(3, 2, 0.5, 0.25), std::invalid_argument);   // r1 > r2
    CHECK_THROWS_AS(Sensitivity(1, 2, 0.5, 0.5), std::invalid_argument);    // p1 = p2
    CHECK_THROWS_AS(Sensitivity(1, 2, 0.25, 0.5), std::invalid_argument);   // p1 < p2
    CHECK_THROWS_AS(Sensitivity(1, 2, 1.0, 0.5), std::invalid_argument);    // p1 = 1
    CHECK_THROWS_AS(Sensitivity(1, 2, 0.5, 0.0), std::invalid_argument);    // p2 = 0
}

TEST_CASE("bit sampling basics") {
    CHECK_THROWS_AS(BitSamplingFamily(0), std::invalid_argument);

    BitSamplingFamily fam(8);
    HammingPoint x = hamming_point_from_bits("10110100");
    HammingPoint y = x;
    // identical points collide under every draw
    for (uint64_t s = 0; s < 64; ++s) {
        auto fn = fam.sample(s);
        CHECK(fn(x) == fn(y));
    }
    // complementary vectors never collide
    HammingPoint z = hamming_point_from_bits("01001011");
    for (uint64_t s = 0; s < 64; ++s) {
        auto fn = fam.sample(s);
        CHECK(fn(x) != fn(z));
    }
    CHECK(hamming_distance(x, z) == 8);
}

TEST_CASE("bit sampling collision frequency matches 1 - t/d") {
    const uint64_t d = 128, t = 16, trials = 100000;
    BitSamplingFamily fam(d);
    detail::SplitMix64 rng(11);
    HammingPoint x = random_point(rng, d);
    HammingPoint y = flip_bits(x, d, t, 12);
    McEstimate est = mc_collision_prob(fam, x, y, trials, 13);
    double p = 1.0 - double(t) / double(d);
    CHECK(std::abs(est.frequency - p) <= 3.0 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("bit sampling point validation") {
    BitSamplingFamily fam(10);
    HammingPoint bad;
    bad.words = {uint64_t(1) << 12};  // bit beyond dimension 10
    CHECK_THROWS_AS(fam.check_point(bad), std::invalid_argument);
    HammingPoint wrong_len;
    wrong_len.words = {0, 0};
    CHECK_THROWS_AS(fam.check_point(wrong_len), std::invalid_argument);
    CHECK_NOTHROW(fam.check_point(hamming_point_from_bits("0000000000")));
}

TEST_CASE("minhash equal, disjoint, and exact Jaccard") {
    CHECK_THROWS_AS(MinHashFamily(0), std::invalid_argument);
    MinHashFamily fam(6);
    JaccardSet a{{1, 2, 3}};
    JaccardSet b{{2, 3, 4}};
    JaccardSet c{{4, 5, 6}};
    for (uint64_t s = 0; s < 64; ++s) {
        auto fn = fam.sample(s);
        CHECK(fn(a) == fn(a));
        CHECK(fn(a) != fn(c));  // disjoint sets under injective priorities
    }
    // exhaustive oracle: enumerate all 720 priority orders of [6]
    std::vector<uint32_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0u);
    uint64_t total = 0, collisions = 0;
    auto argmin = [&](const JaccardSet& s) {
        uint32_t best_e = 0, best_p = ~0u;
        for (uint32_t e : s.elems) {
            if (perm[e - 1] < best_p) best_p = perm[e - 1], best_e = e;
        }
        return best_e;
    };
    do {
        ++total;
        collisions += argmin(a) == argmin(b);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(total == 720);
    double exact = double(collisions) / double(total);
    CHECK(exact == doctest::Approx(0.5));  // J = 2/4
    CHECK(jaccard_distance(a, b) == doctest::Approx(0.5));

    // Monte-Carlo draw frequency agrees with the exhaustive value
    McEstimate est = mc_collision_prob(fam, a, b, 100000, 5);
    CHECK(std::abs(est.frequency - exact) <= 3.0 * std::sqrt(exact * (1 - exact) / est.trials));
}

TEST_CASE("minhash rejects empty sets at evaluation") {
    MinHashFamily fam(6);
    auto fn = fam.sample(1);
    JaccardSet empty;
    CHECK_THROWS_AS(fn(empty), std::invalid_argument);
    CHECK_THROWS_AS(fam.check_point(empty), std::invalid_argument);
    JaccardSet bad{{2, 2, 3}};
    CHECK_THROWS_AS(fam.check_point(bad), std::invalid_argument);
    JaccardSet out_of_range{{1, 7}};
    CHECK_THROWS_AS(fam.check_point(out_of_range), std::invalid_argument);
}

TEST_CASE("minhash large-universe sampler still separates disjoint sets") {
    MinHashFamily fam(uint64_t(1) << 20);
    JaccardSet a{{1, 100, 65537}};
    JaccardSet b{{70000, 80000, 1000000}};
    for (uint64_t s = 0; s < 32; ++s) {
        auto fn = fam.sample(s);
        CHECK(fn(a) == fn(a));
        CHECK(fn(a) != fn(b));
    }
}

TEST_CASE("powering: constant function at k = 0, identity at k = 1") {
    BitSamplingFamily base(16);
    auto zero = power(base, 0);
    HammingPoint x = hamming_point_from_bits("1010101010101010");
    HammingPoint y = hamming_point_from_bits("0101010101010101");
    for (uint64_t s = 0; s < 16; ++s) {
        auto fn = zero.sample(s);
        CHECK(fn(x) == fn(y));  // empty tuples are equal
    }
    auto one = power(base, 1);
    for (uint64_t s = 0; s < 16; ++s) {
        auto fn = one.sample(s);
        auto bfn = base.sample(s);
        CHECK(fn(x) == std::vector<uint64_t>{bfn(x)});
    }
}

TEST_CASE("powering: Monte-Carlo collision frequency equals p^k") {
    const uint64_t d = 16, dist = 4, trials = 100000;
    BitSamplingFamily base(d);
    detail::SplitMix64 rng(21);
    HammingPoint x = random_point(rng, d);
    HammingPoint y = flip_bits(x, d, dist, 22);
    double p = 1.0 - double(dist) / double(d);
    for (uint64_t k : {1, 2, 3}) {
        auto fam = power(base, k);
        McEstimate est = mc_collision_prob(fam, x, y, trials, 23 + k);
        double pk = std::pow(p, double(k));
        CHECK(std::abs(est.frequency - pk) <= 3.0 * std::sqrt(pk * (1 - pk) / trials));
    }
}

TEST_CASE("pairwise hash basics") {
    CHECK_THROWS_AS(PairwiseHash(0, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(PairwiseHash(4, 0, 1), std::invalid_argument);

    // single-element range: constant zero
    PairwiseHash c(64, 1, 7);
    for (uint64_t l = 0; l < 64; ++l) CHECK(c(l) == 0);

    // determinism: same (L, m, seed) gives identical tables
    PairwiseHash f1(64, 8, 99), f2(64, 8, 99);
    for (uint64_t l = 0; l < 64; ++l) {
        CHECK(f1(l) == f2(l));
        CHECK(f1(l) < 8);
    }
}

TEST_CASE("pairwise hash collision probability at most 1/m") {
    const uint64_t trials = 100000, m = 8;
    uint64_t collisions = 0;
    for (uint64_t s = 0; s < trials; ++s) {
        PairwiseHash f(64, m, detail::derive_seed(555, 0, s));
        collisions += f(3) == f(17);
    }
    double freq = double(collisions) / trials;
    double p = 1.0 / double(m);
    CHECK(freq <= p + 3.0 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("pairwise hash marginals are uniform (chi-square)") {
    const uint64_t trials = 20000, m = 8;
    // chi-square critical value at significance 0.001 with 7 degrees of freedom
    const double crit = 24.322;
    for (uint64_t l : {0, 5, 63}) {
        std::vector<uint64_t> counts(m, 0);
        for (uint64_t s = 0; s < trials; ++s) {
            PairwiseHash f(64, m, detail::derive_seed(777, l, s));
            ++counts[f(l)];
        }
        double expected = double(trials) / m;
        double chi2 = 0;
        for (uint64_t c : counts) {
            double diff = double(c) - expected;
            chi2 += diff * diff / expected;
        }
        CHECK(chi2 < crit);
    }
}

TEST_CASE("fingerprint determinism and prefix separation") {
    std::vector<uint64_t> t1{1, 2, 3};
    std::vector<uint64_t> t2{1, 2, 3};
    CHECK(fingerprint(t1) == fingerprint(t2));
    CHECK(fingerprint(t1, 42) == fingerprint(t2, 42));
    CHECK(fingerprint(t1, 42) != fingerprint(t1, 43));

    std::vector<uint64_t> prefix{1, 2};
    CHECK(fingerprint(t1) != fingerprint(prefix));
    std::vector<uint64_t> zero1{0};
    std::vector<uint64_t> zero2{0, 0};
    CHECK(fingerprint(zero1) != fingerprint(zero2));

    CHECK_THROWS_AS(fingerprint(std::span<const uint64_t>{}), std::invalid_argument);
}

TEST_CASE("fingerprint birthday bound over a million random tuples") {
    const size_t count = 1000000;
    detail::SplitMix64 rng(31337);
    std::vector<uint64_t> fps;
    fps.reserve(count);
    std::vector<uint64_t> tup(3);
    for (size_t i = 0; i < count; ++i) {
        // distinct tuples: embed the index
        tup[0] = i;
        tup[1] = rng.next();
        tup[2] = rng.next();
        fps.push_back(fingerprint(tup));
    }
    std::sort(fps.begin(), fps.end());
    size_t colliding_pairs = 0;
    for (size_t i = 1; i < fps.size(); ++i) colliding_pairs += fps[i] == fps[i - 1];
    CHECK(colliding_pairs <= 3);  // expected ~ (10^6)^2 / 2^65
}
