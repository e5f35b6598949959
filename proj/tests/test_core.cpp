#include "slowent/word.hpp"

#include <doctest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <cmath>
#include <sstream>

using namespace slowent;

namespace {

// Words within strictly fewer than eps*n mismatches, counted by binomials.
std::uint64_t ball_count_formula(std::uint64_t n, std::uint64_t sigma, const Rational& eps) {
    std::uint64_t total = 0;
    std::uint64_t binom = 1;
    for (std::uint64_t m = 0; m <= n; ++m) {
        if (Rational(m) >= eps * n) break;
        std::uint64_t p = 1;
        for (std::uint64_t i = 0; i < m; ++i) p *= sigma - 1;
        total += binom * p;
        binom = binom * (n - m) / (m + 1);
    }
    return total;
}

double closed_form(double n, double sigma, double e) {
    return std::exp(n * (2 * e * std::log(sigma) - (1 - e) * std::log(1 - 2 * e) - 3 * e * std::log(e)));
}

}  // namespace

TEST_CASE("hamming distance on small words") {
    CHECK(hamming_distance({0, 1, 2, 3}, {0, 1, 2, 3}) == 0);
    CHECK(hamming_distance({0, 1, 0, 1}, {1, 0, 1, 0}) == 1);
    CHECK(hamming_distance({0, 0, 1, 1}, {0, 0, 1, 0}) == Rational(1, 4));
    CHECK_THROWS_AS(hamming_distance({0, 1}, {0}), Error);
    CHECK_THROWS_AS(hamming_distance({}, {}), Error);
}

TEST_CASE("hamming distance is a metric on random triples") {
    boost::random::mt19937_64 rng(7);
    boost::random::uniform_int_distribution<Symbol> sym(0, 2);
    for (int rep = 0; rep < 500; ++rep) {
        Word a(9), b(9), c(9);
        for (std::size_t i = 0; i < 9; ++i) a[i] = sym(rng), b[i] = sym(rng), c[i] = sym(rng);
        CHECK(hamming_distance(a, b) == hamming_distance(b, a));
        CHECK((hamming_distance(a, b) == 0) == (a == b));
        CHECK(hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c));
        CHECK(overlap_distance(a, b, 0).distance == hamming_distance(a, b));
    }
}

TEST_CASE("overlap alignment follows the left shift") {
    auto o = overlap_distance({0, 1, 2, 3}, {0, 1, 2, 3}, 0);
    CHECK(o.distance == 0);
    CHECK(o.interval.length == 4);

    o = overlap_distance({0, 1, 2, 3}, {0, 1, 2, 3}, 1);
    CHECK(o.interval.start == 1);
    CHECK(o.interval.length == 3);
    CHECK(o.distance == 1);

    o = overlap_distance({0, 0, 0, 0}, {0, 0, 1, 1}, 2);
    CHECK(o.interval.length == 2);
    CHECK(o.distance == 0);

    CHECK_THROWS_AS(overlap_distance({0, 1}, {0, 1}, 2), Error);
}

TEST_CASE("ball enumeration matches the binomial count") {
    CHECK(enumerate_ball({0, 1, 0}, 2, Rational(1, 4)) == 1);
    CHECK(enumerate_ball({0, 1, 0}, 2, Rational(2, 5)) == 4);
    CHECK(enumerate_ball({2, 0}, 3, Rational(3, 5)) == 5);
    for (std::uint64_t n = 1; n <= 7; ++n)
        for (std::uint32_t s = 2; s <= 4; ++s)
            for (const Rational e : {Rational(1, 5), Rational(1, 3), Rational(1, 2), Rational(3, 4)})
                CHECK(enumerate_ball(Word(n, 0), s, e) == ball_count_formula(n, s, e));
    CHECK_THROWS_AS(enumerate_ball(Word(30, 0), 4, Rational(1, 2)), Error);
}

TEST_CASE("ball bound closed form and domination of the exact count") {
    const double want = closed_form(100, 4, 0.05);
    CHECK(ball_bound(100, 4, Rational(1, 20)).value == doctest::Approx(want).epsilon(1e-12));
    CHECK(ball_bound(0, 4, Rational(1, 20)).value == 1.0);
    CHECK_THROWS_AS(ball_bound(5, 4, Rational(1, 10)), Error);
    CHECK_THROWS_AS(ball_bound(5, 4, Rational(0)), Error);

    for (std::uint64_t n = 1; n <= 10; ++n)
        for (std::uint32_t s = 2; s <= 4; ++s)
            for (const Rational e : {Rational(1, 20), Rational(9, 100)}) {
                const auto bb = ball_bound(n, s, e);
                CHECK(static_cast<double>(enumerate_ball(Word(n, 0), s, e)) <= bb.value);
            }

    // Simplified form needs eps >= 1/|Sigma| and ln|Sigma| >= 1.
    const auto big = ball_bound(5, 12, Rational(9, 100));
    REQUIRE(big.simplified.has_value());
    CHECK(*big.simplified >= 1.0);
    CHECK(*big.simplified >= static_cast<double>(enumerate_ball(Word(5, 0), 12, Rational(9, 100))));
    CHECK_FALSE(ball_bound(6, 4, Rational(1, 20)).simplified.has_value());
}

TEST_CASE("Q bound") {
    const double e = 0.001;
    const double expo = 24 * e * std::log(2.0) - (1 - 2 * e) * std::log(1 - 4 * e) - 6 * e * std::log(2 * e);
    CHECK(q_bound(1, 10) == doctest::Approx(std::exp(10 * expo)).epsilon(1e-12));
    for (std::uint64_t n = 1; n <= 50; ++n) {
        CHECK(std::log(q_bound(n, 20)) == doctest::Approx(2 * std::log(q_bound(n, 10))).epsilon(1e-12));
        CHECK(q_bound(n, 1) >= 1.0);
        // Same shape as the ball bound with |Sigma| = (n+1)^6 and radius 2 eps.
        const double sig = std::pow(double(n + 1), 6);
        CHECK(q_exponent(n) == doctest::Approx(std::log(closed_form(1, sig, 2 * e))).epsilon(1e-12));
    }
}

TEST_CASE("WORDS v1 round trip") {
    std::vector<Word> ws{{0, 1, 2}, {2, 2, 0}};
    std::stringstream ss;
    write_words(ss, ws, 3, 4);
    const auto f = read_words(ss);
    CHECK(f.sigma == 3);
    CHECK(f.k == 3);
    CHECK(f.stage == std::optional<std::uint64_t>(4));
    CHECK(f.words == ws);

    std::stringstream bad("WORDS v1 sigma=2 k=2 N=1\n0 3\n");
    CHECK_THROWS_AS(read_words(bad), Error);
}

TEST_CASE("alphabet reserved ids") {
    Alphabet a;
    a.size = 4;
    a.b = 2;
    a.e = 2;
    CHECK_THROWS_AS(a.validate(), Error);
    a.e = 3;
    CHECK_NOTHROW(a.validate());
    CHECK_THROWS_AS(a.check({0, 4}), Error);
}
