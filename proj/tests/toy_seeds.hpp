#pragma once

#include "slowent/abc.hpp"

#include <optional>
#include <utility>

namespace toy {

using slowent::BigInt;
using slowent::Rational;
using slowent::ScheduleKind;
using slowent::ScheduleSeeds;
using slowent::StageOverride;

inline StageOverride ov(std::optional<BigInt> k, std::optional<BigInt> l, std::optional<BigInt> s,
                        std::optional<BigInt> r = std::nullopt) {
    return {std::move(k), std::move(l), std::move(s), std::move(r)};
}

struct Toy {
    ScheduleKind kind;
    std::optional<Rational> u;
    ScheduleSeeds seeds;
};

// Small three-stage profiles; overrides stand in wherever a formula value is astronomic.
inline std::vector<Toy> three_stage_profiles() {
    std::vector<Toy> out;
    const std::vector<Rational> tenth(3, Rational(1, 10));
    {
        ScheduleSeeds s;
        s.q1 = 2, s.p1 = 1, s.s0 = 2;
        s.eps = {Rational(1, 2), Rational(1, 10), Rational(1, 10)};
        s.overrides[1] = ov(BigInt(4), std::nullopt, std::nullopt);
        s.overrides[2] = ov(BigInt(2048), BigInt(3), BigInt(4096));
        s.overrides[3] = ov(BigInt(4096), BigInt(5), BigInt(8192));
        out.push_back({ScheduleKind::rigid_upper, Rational(1), s});
    }
    {
        ScheduleSeeds s;
        s.q1 = 1, s.p1 = 0, s.s0 = 2, s.k0 = 1;
        s.eps = tenth;
        s.floor = {{1, 1}, {2, 1}, {3, 1}};
        out.push_back({ScheduleKind::rigid_lower, Rational(1, 2), s});
    }
    {
        ScheduleSeeds s;
        s.q1 = 1, s.p1 = 0, s.s0 = 2;
        s.eps = tenth;
        s.u_seq = {Rational(1), Rational(2), Rational(4), Rational(8)};
        s.floor = {{1, 1}, {2, 1}, {3, 1}};
        out.push_back({ScheduleKind::rigid_lower_inf, std::nullopt, s});
    }
    {
        ScheduleSeeds s;
        s.q1 = 1, s.p1 = 0, s.s0 = 2, s.k0 = 1, s.r0 = 1;
        s.eps = tenth;
        s.floor = {{1, 1}};
        s.overrides[2] = ov(BigInt(28800), BigInt(3), std::nullopt, BigInt(14400));
        s.overrides[3] = ov(BigInt(57600), BigInt(3), std::nullopt, BigInt(28800));
        out.push_back({ScheduleKind::cyclic_upper, Rational(1), s});
    }
    {
        ScheduleSeeds s;
        s.q1 = 1, s.p1 = 0, s.s0 = 2, s.k0 = 1, s.r0 = 1;
        s.eps = tenth;
        s.floor = {{1, 1}, {2, 1}, {3, 1}};
        out.push_back({ScheduleKind::cyclic_lower, Rational(1, 2), s});
    }
    {
        ScheduleSeeds s;
        s.q1 = 1, s.p1 = 0, s.s0 = 2, s.k0 = 1, s.r0 = 1;
        s.eps = tenth;
        s.u_seq = {Rational(1), Rational(1), Rational(1)};
        s.floor = {{1, 1}, {2, 1}, {3, 1}};
        out.push_back({ScheduleKind::cyclic_inf, std::nullopt, s});
    }
    {
        ScheduleSeeds s;
        s.q1 = 3, s.p1 = 2, s.s0 = 2;
        s.eps = tenth;
        s.overrides[1] = ov(BigInt(4), BigInt(2), BigInt(4));
        s.overrides[2] = ov(BigInt(8), BigInt(3), BigInt(8));
        s.overrides[3] = ov(BigInt(16), BigInt(5), BigInt(16));
        out.push_back({ScheduleKind::custom, std::nullopt, s});
    }
    return out;
}

}  // namespace toy
