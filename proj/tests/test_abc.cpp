#include "slowent/abc.hpp"
#include "slowent/sampler.hpp"

#include "toy_seeds.hpp"

#include <doctest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <numeric>

using namespace slowent;

namespace {

constexpr Symbol B = 100, E = 101;

// Direct expansion with j_i found by search instead of a modular inverse.
Word expand(const std::vector<Word>& ws, std::uint64_t q, std::uint64_t p, std::uint64_t l) {
    Word out;
    for (std::uint64_t i = 0; i < q; ++i) {
        std::uint64_t ji = 0;
        while ((p * ji) % q != i % q) ++ji;
        for (const auto& w : ws) {
            out.insert(out.end(), q - ji, B);
            for (std::uint64_t r = 0; r + 1 < l; ++r) out.insert(out.end(), w.begin(), w.end());
            out.insert(out.end(), ji, E);
        }
    }
    return out;
}

std::size_t count(const Word& w, Symbol x) { return std::count(w.begin(), w.end(), x); }

}  // namespace

TEST_CASE("circular operator hand expansions") {
    CHECK(circular_operator({{7}}, 1, 0, 1, B, E) == Word{B});
    CHECK(circular_operator({{0, 1}}, 2, 1, 2, B, E) == Word{B, B, 0, 1, B, 0, 1, E});
    const Word w3 = circular_operator({{0, 1, 2}, {2, 1, 0}}, 3, 2, 1, B, E);
    CHECK(w3.size() == 18);
    CHECK(count(w3, B) == 12);
    CHECK(count(w3, E) == 6);
    CHECK(w3 == expand({{0, 1, 2}, {2, 1, 0}}, 3, 2, 1));
    CHECK_THROWS_AS(circular_operator({{0, 1}}, 2, 2, 1, B, E), Error);
    CHECK_THROWS_AS(circular_operator({{0, 1, 2}}, 2, 1, 1, B, E), Error);
}

TEST_CASE("circular operator counts on random tuples") {
    boost::random::mt19937_64 rng(17);
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) {
        return boost::random::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
    };
    for (int rep = 0; rep < 100; ++rep) {
        const std::uint64_t q = pick(1, 20), k = pick(1, 10), l = pick(1, 10);
        std::uint64_t p = pick(0, q - 1);
        while (std::gcd(p, q) != 1) p = pick(0, q - 1);
        std::vector<Word> ws(k, Word(q));
        for (auto& w : ws)
            for (auto& x : w) x = static_cast<Symbol>(pick(0, 3));
        const Word out = circular_operator(ws, q, p, l, B, E);
        CHECK(out.size() == k * l * q * q);
        CHECK(count(out, B) == k * q * (q + 1) / 2);
        CHECK(count(out, E) == k * q * (q - 1) / 2);
        CHECK(out == expand(ws, q, p, l));
    }
}

TEST_CASE("rigid_upper toy profile values") {
    ScheduleSeeds s;
    s.q1 = 2, s.p1 = 1, s.s0 = 2;
    s.eps = {Rational(1, 2)};
    s.overrides[1] = toy::ov(BigInt(4), std::nullopt, std::nullopt);
    const auto sch = build_schedule(ScheduleKind::rigid_upper, Rational(1), s, 1);
    REQUIRE(sch.stages.size() == 1);
    CHECK(sch.stages[0].s == 2048);
    CHECK(sch.stages[0].l == 256);
    CHECK(sch.q_next() == 4096);
}

TEST_CASE("every schedule kind satisfies its clauses over three stages") {
    for (const auto& t : toy::three_stage_profiles()) {
        CAPTURE(kind_name(t.kind));
        const auto sch = build_schedule(t.kind, t.u, t.seeds, 3);
        REQUIRE(sch.stages.size() == 3);
        for (std::size_t i = 0; i + 1 < sch.stages.size(); ++i) {
            const auto& a = sch.stages[i];
            const auto& b = sch.stages[i + 1];
            CHECK(b.q == a.k * a.l * a.q * a.q);
            CHECK(b.alpha - a.alpha == Rational(BigInt(1), a.k * a.l * a.q * a.q));
        }
        for (const auto& c : validate_schedule(sch, &t.seeds)) {
            CAPTURE(c.clause);
            CHECK(c.ok);
        }
        if (t.kind == ScheduleKind::cyclic_upper) {
            const auto& st = sch.stages[0];
            CHECK(st.k % *st.r == 0);
            CHECK(st.k / *st.r == ipow(*st.r, st.q.convert_to<std::uint64_t>()));
        }
        const auto back = schedule_from_json(schedule_to_json(sch));
        CHECK(schedule_to_json(back).dump() == schedule_to_json(sch).dump());
    }
}

TEST_CASE("schedule errors name the stage and clause") {
    ScheduleSeeds s;
    s.q1 = 2, s.p1 = 1, s.s0 = 2;
    s.eps = {Rational(1, 2)};
    s.overrides[1] = toy::ov(BigInt(3), BigInt(1), BigInt(4));
    CHECK_THROWS_WITH_AS(build_schedule(ScheduleKind::rigid_upper, Rational(1), s, 1),
                         doctest::Contains("stage 1, clause s_{n-1} | k_n"), Error);
    s.overrides.clear();
    CHECK_THROWS_WITH_AS(build_schedule(ScheduleKind::rigid_upper, Rational(1), s, 1),
                         doctest::Contains("K_0"), Error);
}

TEST_CASE("safe domain bound") {
    ScheduleSeeds s;
    s.q1 = 1, s.p1 = 0, s.s0 = 1;
    s.eps = std::vector<Rational>(4, Rational(1, 10));
    for (std::uint64_t m = 1; m <= 4; ++m) s.overrides[m] = toy::ov(BigInt(1), BigInt(m * m), BigInt(1));
    const auto sch = build_schedule(ScheduleKind::custom, std::nullopt, s, 4);
    const auto b = safe_domain_bound(sch, 2, 4);
    CHECK(b.measure_lower_bound == 1 - 2 * (Rational(1, 4) + Rational(1, 9) + Rational(1, 16)));
    REQUIRE(b.single_stage.size() == 3);
    CHECK(b.single_stage[0].second == 1 - Rational(2, 4));
    CHECK(safe_domain_bound(sch, 1, 4).measure_lower_bound == 0);  // clamped
    CHECK(safe_domain_bound(sch, 4, 4).measure_lower_bound >= safe_domain_bound(sch, 3, 4).measure_lower_bound);
    CHECK_THROWS_AS(safe_domain_bound(sch, 3, 5), Error);
}

TEST_CASE("untwisted stage names") {
    // Single-symbol alphabet: every name is C(u_0, ..., u_0).
    const auto z1 = stage_zero_names(1, 2);
    const auto one = stage_names_untwisted(z1, {Word(3, 0)}, 1, 2, 1, 2);
    REQUIRE(one.names.size() == 1);
    CHECK(one.names[0] == circular_operator({z1.names[0], z1.names[0], z1.names[0]}, 2, 1, 2, z1.b, z1.e));

    const std::uint64_t q = 3, p = 1, l = 4;
    const auto z = stage_zero_names(4, q);
    const auto coll = sample_uniform_distinct(4, 8, 6, 5);
    const auto st = stage_names_untwisted(z, coll, 6, q, p, l);
    REQUIRE(st.names.size() == 6);
    for (std::size_t i = 0; i < st.names.size(); ++i) {
        const auto& nm = st.names[i];
        CHECK(nm.size() == 8 * l * q * q);
        CHECK(Rational(count(nm, st.b) + count(nm, st.e), nm.size()) == Rational(1, l));
        CHECK(st.tuples[i] == coll[i]);
    }

    auto bad = coll;
    bad[1] = bad[0];
    CHECK_THROWS_WITH_AS(stage_names_untwisted(z, bad, 6, q, p, l), doctest::Contains("R3"), Error);
    bad = coll;
    bad[2][0] = bad[2][1] == 0 ? 1 : 0;
    if (bad[2] != coll[2]) CHECK_THROWS_WITH_AS(stage_names_untwisted(z, bad, 6, q, p, l), doctest::Contains("R2"), Error);
}

TEST_CASE("twisted assignment") {
    const auto a = twisted_assignment({{3, 1, 2}}, 3, 3);
    CHECK(a.psi == Word{3, 1, 2});
    CHECK(a.rectangle_first(0, 0, 10) == 30);
    CHECK(a.rectangle_first(2, 1, 10) == 12);
    CHECK(TwistedAssignment::rectangle_rest(7, 3) == std::pair<std::uint64_t, std::uint64_t>{2, 1});
    const auto two = twisted_assignment({{0, 1}, {1, 0}}, 2, 4);
    CHECK(two.psi == Word{0, 1, 1, 0});
    CHECK_THROWS_AS(twisted_assignment({{0, 1}}, 2, 3), Error);
}

TEST_CASE("separation statistics") {
    const Word w{0, 1, 2, 3, 0, 1, 2, 3};
    auto dup = separation_stats({w, w}, {0, 1}, 4);
    CHECK(dup.min_distance == 0);
    CHECK(dup.min_t0 == std::optional<Rational>(0));

    const Word a(8, 0), b(8, 1);
    auto far = separation_stats({a, b}, {0}, 4);
    CHECK(far.min_t0 == std::optional<Rational>(1));
    CHECK(far.min_distance == 1);
    REQUIRE(far.certified_radius.has_value());
    CHECK(far.names_needed(Rational(1, 4)) == std::optional<std::uint64_t>(2));
}
