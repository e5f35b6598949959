#pragma once

#include "slowent/entropy.hpp"
#include "slowent/word.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace slowent {

enum class ScheduleKind { rigid_upper, rigid_lower, rigid_lower_inf, cyclic_upper, cyclic_lower, cyclic_inf, custom };

std::string kind_name(ScheduleKind k);
ScheduleKind parse_kind(const std::string& s);

struct StageParams {
    std::uint64_t n = 1;
    BigInt q = 1, p = 0, k = 1, l = 1, s = 1;
    std::optional<BigInt> r;
    Rational alpha = 0;
    Rational eps = Rational(1, 4);
    std::optional<Rational> u_n;  // per-stage target (infinite kinds)
    BigInt floor = 0;             // K_0 / L_0 lower bound used for k (or r)
    std::vector<std::string> overridden;
};

struct StageOverride {
    std::optional<BigInt> k, l, s, r;
};

struct ScheduleSeeds {
    BigInt q1 = 1, p1 = 0;
    BigInt s0 = 2;
    BigInt k0 = 1, r0 = 1;  // k_0 and r_0 for the kinds that look back one stage
    std::vector<Rational> eps;               // eps_1, eps_2, ...
    std::vector<Rational> u_seq;             // u_1, u_2, ... (infinite kinds)
    std::map<std::uint64_t, BigInt> floor;   // K_0 / L_0 per stage
    std::map<std::uint64_t, StageOverride> overrides;
    std::uint64_t bit_budget = 1u << 20;
    std::uint64_t search_limit = 100000;  // candidates tried when a divisibility clause needs a search
};

struct ClauseCheck {
    std::uint64_t stage = 0;
    std::string clause;
    bool ok = false;
};

struct AbcSchedule {
    ScheduleKind kind = ScheduleKind::custom;
    std::optional<Rational> u;  // nullopt means infinity
    std::vector<Rational> eps_seq;
    std::vector<StageParams> stages;
    BigInt s0 = 2;
    BigInt k0 = 1, r0 = 1;
    std::vector<std::string> notes;

    // prod (1 - eps_n) over listed stages > 1/2
    bool eps_product_certified() const;
    BigInt q_next() const;  // q_{n_max + 1}
};

AbcSchedule build_schedule(ScheduleKind kind, std::optional<Rational> u, const ScheduleSeeds& seeds,
                           std::uint64_t n_max);

// Structural and formula clauses of every stage; formula clauses are skipped for overridden values.
std::vector<ClauseCheck> validate_schedule(const AbcSchedule& s, const ScheduleSeeds* seeds = nullptr);

nlohmann::json schedule_to_json(const AbcSchedule& s);
AbcSchedule schedule_from_json(const nlohmann::json& j);

struct SafeDomainBound {
    std::uint64_t n = 0, horizon = 0;
    Rational measure_lower_bound = 0;
    std::vector<std::pair<std::uint64_t, Rational>> single_stage;  // (m, 1 - 2/l_m)
};
SafeDomainBound safe_domain_bound(const AbcSchedule& s, std::uint64_t n, std::uint64_t horizon);

// prod_{i<q} prod_{j<k} b^{q - j_i} w_j^{l-1} e^{j_i}, j_i = p^{-1} i mod q.
Word circular_operator(const std::vector<Word>& words, std::uint64_t q, std::uint64_t p, std::uint64_t l,
                       Symbol b, Symbol e);

struct StageNames {
    std::uint64_t stage = 0;
    std::vector<Word> names;
    std::uint32_t alphabet = 0;  // symbols below this, plus b and e
    Symbol b = 0, e = 1;
    // untwisted: tuple of prev-name indices per new name
    std::vector<Word> tuples;
};

// s_0 constant names [s]^q; b = s_0, e = s_0 + 1.
StageNames stage_zero_names(std::uint32_t s0, std::uint64_t q);

StageNames stage_names_untwisted(const StageNames& prev, const std::vector<Word>& collection,
                                 std::uint64_t s_n, std::uint64_t q, std::uint64_t p, std::uint64_t l);

// Cyclic windows of the stage names, each (name, start) weighted 1 / (s q).
inline CodedDistribution coded_distribution(const StageNames& names, std::size_t n) {
    return cyclic_name_distribution(names.names, n);
}

struct TwistedAssignment {
    std::uint64_t r = 0, k = 0;
    Word psi;
    BigInt rectangle_first(std::uint64_t i, std::uint64_t j, const BigInt& prev_rlq) const;
    static std::pair<std::uint64_t, std::uint64_t> rectangle_rest(std::uint64_t j, std::uint64_t s_n);
};
TwistedAssignment twisted_assignment(const std::vector<Word>& collection, std::uint64_t r, std::uint64_t k);

struct SeparationStats {
    Rational min_distance = 1;
    double mean_distance = 0;
    std::size_t i = 0, j = 0, t = 0;  // witness
    std::uint64_t pairs_checked = 0;
    std::optional<Rational> min_t0;  // t = 0, i != j
    std::size_t distinct_names = 0;
    // Radii below which every ball holds at most one name: r <= min_t0 / 2.
    std::optional<Rational> certified_radius;
    // Balls needed at radius r (at most one name per ball) when r is certified.
    std::optional<std::uint64_t> names_needed(const Rational& radius) const;
};

SeparationStats separation_stats(const std::vector<Word>& names, const std::vector<std::size_t>& shift_grid,
                                 std::size_t min_overlap, unsigned threads = 1);

}  // namespace slowent
