#include "slowent/cutstack.hpp"

#include <doctest.h>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

using namespace slowent;

namespace {

Profile small_profile(std::uint64_t C, BigInt h1, BigInt h2) {
    Profile p;
    p.name = "unit";
    p.cut_counts = {C};
    p.h1 = h1;
    p.h2 = h2;
    p.w1 = Rational(1, 8);
    p.w2 = Rational(1, 100);
    p.H_prev = 1;
    p.relaxed = {"cut_count", "height_ratio_floor", "initial_heights"};
    return p;
}

Word repeat(const Word& w, std::size_t times) {
    Word out;
    for (std::size_t i = 0; i < times; ++i) out.insert(out.end(), w.begin(), w.end());
    return out;
}

std::vector<RankTwoSystem> run(const Profile& p, std::uint64_t stages, std::uint64_t seed) {
    std::vector<RankTwoSystem> out{init_system(p)};
    for (std::uint64_t s = 1; s < stages; ++s) out.push_back(advance_stage(out.back(), seed + s).first);
    return out;
}

}  // namespace

TEST_CASE("stage product and step weights") {
    CHECK(stage_H(4, 1, 1) == 20);
    CHECK(stage_H(4, 1, 2) == 4 * 5 * 6 * 7);

    auto one = step_weights(7, 1, 1);
    CHECK(one.alpha == std::vector<Rational>{1});
    CHECK(one.beta == std::vector<Rational>{1});

    auto two = step_weights(4, 2, 2);
    CHECK(two.alpha == std::vector<Rational>{Rational(3, 5), Rational(2, 5)});

    boost::random::mt19937_64 rng(5);
    boost::random::uniform_int_distribution<int> d(1, 50);
    for (int rep = 0; rep < 100; ++rep) {
        const BigInt Hp = d(rng);
        const BigInt h1 = Hp * d(rng);
        const auto w = step_weights(h1, Hp, static_cast<std::uint64_t>(d(rng) % 6 + 1));
        Rational sa = 0, sb = 0;
        for (const auto& x : w.alpha) sa += x;
        for (const auto& x : w.beta) sb += x;
        CHECK(sa == 1);
        CHECK(sb == 1);
    }
}

TEST_CASE("initial systems") {
    const auto paper = init_system(Profile::paper_profile());
    CHECK(paper.tower1.height == ipow(2, 21));
    CHECK(paper.tower2.height == ipow(2, 70));
    CHECK(paper.tower1.width == Rational(BigInt(1), ipow(2, 21)));
    CHECK(paper.tower2.width == Rational(BigInt(1), ipow(2, 70)));
    CHECK_THROWS_AS(advance_stage(paper, 1), Error);

    auto p = small_profile(1, 4, 24);
    p.w1 = Rational(1, 4);
    p.w2 = Rational(1, 24);
    const auto s = init_system(p);
    CHECK(s.h1_divisible());
    CHECK(s.mass() == 2);

    p.H_prev = 3;
    CHECK_THROWS_AS(init_system(p), Error);
}

TEST_CASE("coding words for the C = 1 hand expansion") {
    const auto sys = init_system(small_profile(1, 4, 20));
    REQUIRE(sys.H == 20);
    const auto sw = coding_words(sys, 1);
    const Word v1 = sw.v1.materialize();
    REQUIRE(v1.size() == 4);
    CHECK(sw.z[0].materialize() == v1);
    Word v1_0 = v1;
    v1_0.push_back(0);
    CHECK(sw.w[0].materialize() == repeat(v1, 5));
    CHECK(sw.w[1].materialize() == repeat(v1_0, 4));
    CHECK(sw.v2.length() == 20);
}

TEST_CASE("distance between periodic words matches direct expansion") {
    const auto sys = init_system(small_profile(2, 4, 840));
    const auto sw = coding_words(sys, 1);
    REQUIRE(sw.w.size() == 4);
    for (std::uint64_t i = 0; i < 4; ++i)
        for (std::uint64_t j = 0; j < 4; ++j) {
            if (i == j) {
                CHECK_THROWS_AS(w_distance(sw, i, j), Error);
                continue;
            }
            CHECK(w_distance(sw, i, j) == hamming_distance(sw.w[i].materialize(), sw.w[j].materialize()));
        }
    for (std::uint64_t m = 1; m <= 60; ++m) {
        const BigInt x = m * sw.H_prev;
        CHECK(realigned(sw, 1, 3, m) == (x % sw.z[1].length() == 0 && x % sw.z[3].length() == 0));
    }
    CHECK(realigned(sw, 1, 3, 35));  // lcm(5, 7)
    CHECK_FALSE(realigned(sw, 1, 3, 5));
}

TEST_CASE("desk runs keep the divisibility chain and conserve mass") {
    for (std::uint64_t C : {1u, 2u}) {
        CAPTURE(C);
        const auto systems = run(Profile::desk(C), 3, 40);
        for (std::size_t s = 0; s < systems.size(); ++s) {
            const auto& sys = systems[s];
            CHECK(sys.n == s + 1);
            CHECK(sys.h1_divisible());
            CHECK(sys.h2_divisible());
            CHECK(sys.H % sys.H_prev == 0);
            CHECK(sys.H == stage_H(sys.tower1.height, sys.H_prev, sys.profile.C(sys.n)));
            Rational ledger = 0;
            for (const auto& x : sys.spacer_mass_ledger) ledger += x;
            CHECK(sys.mass() == sys.initial_mass + ledger);

            const auto rep = mass_report(sys);
            CHECK(rep.conserved);
            CHECK_FALSE(rep.asserted);

            const auto sw = coding_words(sys, sys.n);
            for (std::size_t k = 0; k < sw.w.size(); ++k) {
                CHECK(sw.w[k].length() == sys.H);
                CHECK(sw.w[k].top_period() == sw.h1 + BigInt(k) * sw.H_prev);
            }
        }
        // Stage-2 codings at the stage-1 partition have the stage-2 heights.
        const auto sw = coding_words(systems[1], 1);
        CHECK(sw.v1.length() == systems[1].tower1.height);
        CHECK(sw.v2.length() == systems[1].tower2.height);
    }
}

TEST_CASE("spacer ledger entries follow the weights") {
    const auto sys0 = init_system(Profile::desk(1));
    const auto [sys1, tr] = advance_stage(sys0, 9);
    Rational want = 0;
    for (std::size_t k = 0; k < tr.W_widths.size(); ++k) want += BigInt(k) * sys0.H_prev * tr.W_widths[k];
    CHECK(tr.spacer_mass == want);
    CHECK(tr.spacer_mass == sys0.H_prev * tr.W_widths[1]);
    REQUIRE(sys1.spacer_mass_ledger.size() == 1);
    CHECK(sys1.spacer_mass_ledger[0] == tr.spacer_mass);
    CHECK(tr.h1_next % sys0.H == 0);
    CHECK(tr.h2_next % tr.H_next == 0);
}

TEST_CASE("replay is deterministic and serialisation round-trips") {
    const auto a = run(Profile::desk(2), 2, 77).back();
    const auto b = run(Profile::desk(2), 2, 77).back();
    const auto ja = system_to_json(a).dump();
    CHECK(ja == system_to_json(b).dump());
    CHECK(system_to_json(system_from_json(system_to_json(a))).dump() == ja);
    CHECK(ja != system_to_json(run(Profile::desk(2), 2, 78).back()).dump());

    const auto p = Profile::desk(2);
    CHECK(profile_to_json(profile_from_json(profile_to_json(p))) == profile_to_json(p));
    auto bad = profile_to_json(p);
    bad["bogus"] = 1;
    CHECK_THROWS_AS(profile_from_json(bad), Error);
}

TEST_CASE("effective index") {
    CHECK_FALSE(effective_index(10, 1, 2).has_value());
    const auto n = effective_index(12000, 1, 2);
    REQUIRE(n.has_value());
    const Rational x = Rational(8, 12000), y = Rational(12000 - 4, 12000 + 4);
    auto holds = [&](std::uint64_t m) {
        const Rational lhs = Rational(1, ipow(m - 1, 6)) + x;
        return lhs <= Rational(6, m * m) && y >= 1 - Rational(6, m * m);
    };
    CHECK(holds(*n));
    for (std::uint64_t m = *n + 1; m < 2 * *n + 10; ++m) CHECK_FALSE(holds(m));
}

TEST_CASE("no-spacer baseline") {
    const auto r = nospacer_baseline(3, 5, Rational(3, 8), Rational(5, 8), {{{1, 2}, Rational(3, 8)}, {{2}, Rational(2, 8)}},
                                     Rational(1, 4));
    CHECK(r.ok);
    CHECK(r.cover.S <= 8);
    CHECK(r.L == 1);

    const auto single = nospacer_baseline(0, 16, 0, Rational(1, 16), {{{2}, Rational(1, 16)}}, Rational(1, 4));
    CHECK(single.cover.S <= 16);

    for (std::uint64_t f : {1u, 2u, 4u}) {
        const auto d = nospacer_baseline(30 * f, 50 * f, Rational(1, 80 * f), Rational(1, 80 * f),
                                         {{{1, 2}, Rational(1, 80 * f)}}, Rational(1, 4));
        CHECK(d.ok);
        CHECK(d.cover.S <= 80 * f);
    }

    CHECK_THROWS_WITH_AS(nospacer_baseline(3, 5, Rational(3, 8), Rational(5, 8), {{{1, 0, 2}, Rational(3, 8)}}, Rational(1, 4)),
                         doctest::Contains("spacers"), Error);
    CHECK_THROWS_AS(nospacer_baseline(3, 5, Rational(3, 8), Rational(5, 8), {{{1, 2}, Rational(1, 8)}}, Rational(1, 4)), Error);
}
