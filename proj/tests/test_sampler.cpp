#include "slowent/sampler.hpp"

#include <doctest.h>

#include <cmath>

using namespace slowent;

namespace {

SamplerParams small_params(std::size_t k, std::size_t N, Rational gamma) {
    SamplerParams p;
    p.sigma = 4;
    p.k = k;
    p.N = N;
    p.eps = Rational(1, 10);
    p.gamma = gamma;
    p.b = GrowthSequence::polynomial(2);
    return p;
}

std::size_t count_symbol(const Word& w, Symbol x) {
    std::size_t c = 0;
    for (Symbol s : w) c += s == x;
    return c;
}

}  // namespace

TEST_CASE("chernoff bounds") {
    auto c = chernoff_bounds(0, Rational(1, 2), Rational(1, 10));
    CHECK(c.two_sided == 1.0);
    CHECK(c.upper_tail == 1.0);
    c = chernoff_bounds(100, Rational(1, 2), Rational(1, 10));
    CHECK(c.two_sided == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
    c = chernoff_bounds(100, Rational(1, 2), Rational(2));
    CHECK(c.upper_tail == doctest::Approx(std::exp(-50.0)).epsilon(1e-12));
}

TEST_CASE("tau threshold") {
    CHECK(tau_threshold(GrowthSequence::polynomial(0), 4, Rational(1, 1000)).tau == 1);
    CHECK(tau_threshold(GrowthSequence::polynomial(1), 4, Rational(1, 1000)).tau == 1);

    // Scan L^10 < 4^{0.982 L} directly; the ratio is eventually decreasing.
    std::uint64_t last_bad = 0;
    for (std::uint64_t L = 1; L < 2000; ++L)
        if (10 * std::log(double(L)) >= 0.982 * L * std::log(4.0)) last_bad = L;
    CHECK(tau_threshold(GrowthSequence::polynomial(10), 4, Rational(1, 1000)).tau == last_bad + 1);

    CHECK_THROWS_AS(tau_threshold(GrowthSequence::polynomial(1), 4, Rational(1, 18)), Error);
}

TEST_CASE("window thresholds") {
    SamplerParams p = small_params(10000, 4, Rational(1, 16));
    p.eps = Rational(1, 1000);
    p.b = GrowthSequence::polynomial(1);
    const auto w = window_thresholds(p);
    const double want = std::ceil(8 * (2 * std::log(1e4)) / (1 - 0.001 - 0.25)) + 1;
    CHECK(double(w.L3_min) == want);
    CHECK(w.beta == w.L4_max + 1);

    std::uint64_t prev = 0;
    for (std::size_t k : {20000u, 40000u, 80000u}) {
        p.k = k;
        const auto x = window_thresholds(p);
        CHECK(x.L4_max >= prev);
        prev = x.L4_max;
    }

    p.k = 52;
    p.b = GrowthSequence::polynomial(40);
    CHECK_THROWS_WITH_AS(window_thresholds(p), "k too small for requested growth sequence", Error);
}

TEST_CASE("K0 estimate") {
    const Rational eps(1, 1000);
    // With N = b_k the short-substring term is k^3 exp(-1/(4 gamma^2)) at L = gamma k, which
    // grows with k, so the union bound never drops below 1/2 for b_k = k.
    CHECK_THROWS_AS(k0_estimate(GrowthSequence::polynomial(1), 4, eps, Rational(1, 16)), Error);
    const double g = 1.0 / 16, k = 1e12;
    CHECK(k0_log_failure(GrowthSequence::polynomial(1), 4, eps, Rational(1, 16), 1000000000000ULL) >=
          3 * std::log(k) - 1 / (4 * g * g) - 1e-6);

    CHECK_THROWS_AS(k0_estimate(GrowthSequence::polynomial(30), 4, eps, Rational(1, 1000000), 100), Error);
}

TEST_CASE("uniform word drawing repairs the endstring") {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t repaired = 0;
        const std::size_t r = 12;
        Word w = draw_uniform_word(4, 200, r, rng, &repaired);
        REQUIRE(w.size() == 200);
        for (Symbol x = 0; x < 4; ++x) CHECK(count_symbol(w, x) == 50);
        CHECK(repaired <= r);
    }
    CHECK(uniform_word_count(2, 4) == 6);
    CHECK(uniform_word_count(4, 4) == 24);
}

TEST_CASE("sample collection") {
    const auto p = small_params(200, 16, Rational(1, 5));
    const auto c = sample_collection(p, 11);
    CHECK(c.theta.size() == 16);
    CHECK(c.report.passed());
    for (const auto& w : c.theta)
        for (Symbol x = 0; x < 4; ++x) CHECK(count_symbol(w, x) == 50);

    // Pure function of (params, seed).
    const auto again = sample_collection(p, 11);
    CHECK(again.theta == c.theta);

    // Re-verification replays the same report and witnesses.
    VerifyOptions vo;
    vo.mode = VerifyOptions::Mode::exhaustive;
    const auto rep = verify_collection(c.theta, p, c.tau, c.beta, vo);
    CHECK(rep.substantial.min_distance == c.report.substantial.min_distance);
    CHECK(rep.substantial.witness == c.report.substantial.witness);
    if (!rep.substantial.vacuous)
        CHECK(replay_separation(c.theta, rep.substantial.witness) == rep.substantial.min_distance);

    auto one = small_params(40, 1, Rational(1, 5));
    CHECK(sample_collection(one, 1).theta.size() == 1);

    auto pig = small_params(4, 500, Rational(1, 2));
    pig.b = GrowthSequence::polynomial(5);
    CHECK_THROWS_AS(sample_collection(pig, 1), Error);
}

TEST_CASE("verifier failure modes") {
    auto p = small_params(200, 2, Rational(1, 10));
    Rng rng(9);
    Word w = draw_uniform_word(4, 200, 4, rng);
    VerifyOptions vo;
    vo.mode = VerifyOptions::Mode::exhaustive;

    const auto same = verify_collection({w, w}, p, 1, 10, vo);
    CHECK_FALSE(same.substantial.ok());
    CHECK(same.substantial.min_distance == 0);
    CHECK(same.substantial.witness.t == 0);
    CHECK(replay_separation({w, w}, same.substantial.witness) == 0);

    Word missing(200);
    for (std::size_t i = 0; i < 200; ++i) missing[i] = i % 3;
    p.N = 1;
    const auto rep = verify_collection({missing}, p, 1, 10, vo);
    CHECK_FALSE(rep.uniformity_ok);
    CHECK_FALSE(rep.passed());
}
