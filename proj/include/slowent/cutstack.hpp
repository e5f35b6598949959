#pragma once

#include "slowent/entropy.hpp"
#include "slowent/rope.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace slowent {

struct Profile {
    std::string name = "desk";
    bool paper = false;
    std::vector<std::uint64_t> cut_counts{1};  // C_1, C_2, ...; the last value repeats
    BigInt h1 = 1, h2 = 2;
    Rational w1 = 1, w2 = Rational(1, 50);
    BigInt H_prev = 1;                   // H_0
    Rational height_ratio_floor = 1;     // lower bound for h1 / H_prev
    std::uint64_t g_floor = 1;
    Rational window_lo = Rational(1, 100), window_hi = Rational(1, 75);
    bool allow_widening = true;
    std::uint64_t R_floor = 1;
    // Also require R large enough that the next split ratio at g = 1 stays below window_hi.
    bool R_keep_window = true;
    std::uint64_t N_cap = 4;
    Rational eps = Rational(1, 1000);
    std::vector<Rational> t_seq{1};      // t_n; the last value repeats
    std::uint64_t materialize_cap = 1u << 20;
    std::uint64_t e_period_min = 64;
    std::uint64_t n0 = 1000;             // first index of the lemma product bounds
    std::vector<std::string> relaxed;    // construction inequalities this profile does not enforce

    static Profile paper_profile();
    static Profile desk(std::uint64_t C);
    std::uint64_t C(std::uint64_t n) const;
    Rational t(std::uint64_t n) const;
    Rational ratio_floor(std::uint64_t n) const;
    void validate() const;
};

nlohmann::json profile_to_json(const Profile& p);
Profile profile_from_json(const nlohmann::json& j);

struct Tower {
    Rational width;
    BigInt height;
};

struct StageRecord {
    std::uint64_t n = 1;
    BigInt h1, h2, H_prev, H;
    Rational w1, w2;
    std::uint64_t C = 1;
    std::uint64_t tau = 1;
    bool tau_certified = false;
    // Filled when this stage is advanced.
    bool advanced = false;
    std::uint64_t g = 0;
    std::vector<Word> a_words;
    std::vector<Word> e_base;  // e-word = e_base[i] repeated e_repeats times
    BigInt e_repeats = 1;
    BigInt R = 0;
    std::uint64_t N = 0;
};

struct StageTrace {
    std::uint64_t n = 0;
    std::uint64_t g = 0;
    Rational split_ratio;  // mu(B^{(1,2)}) / mu(B^{(1)})
    bool window_widened = false;
    Rational window_lo, window_hi;
    std::vector<Rational> alpha, beta;
    std::vector<Rational> W_widths;  // W^{(k)}, k < 2C
    std::vector<Rational> D_widths;
    Rational spacer_mass;
    BigInt h1_next, h2_next, H_next, R;
    std::uint64_t N = 0;
    std::string N_source;
    std::uint64_t tau_next = 0;
    bool tau_next_certified = false;
    std::string e_words;  // "full" or "periodic(m)"
    Rational w1_next, w2_next;
    std::vector<std::string> relaxed;
};

struct RankTwoSystem {
    std::uint64_t n = 1;
    Tower tower1, tower2;
    BigInt H_prev, H;
    std::uint64_t tau = 1;
    bool tau_certified = false;
    std::vector<Rational> spacer_mass_ledger;
    Profile profile;
    std::vector<StageRecord> history;  // history[i] describes stage i + 1
    std::vector<StageTrace> traces;
    Rational initial_mass;

    Rational mass() const;
    bool h1_divisible() const { return tower1.height % H_prev == 0; }
    bool h2_divisible() const { return tower2.height % H == 0; }
};

// H = prod_{i < 2C} (h1 + i H_prev)
BigInt stage_H(const BigInt& h1, const BigInt& H_prev, std::uint64_t C);

RankTwoSystem init_system(const Profile& profile);

struct StepWeights {
    std::vector<Rational> alpha, beta;
};
StepWeights step_weights(const BigInt& h1, const BigInt& H_prev, std::uint64_t C);

std::pair<RankTwoSystem, StageTrace> advance_stage(const RankTwoSystem& sys, std::uint64_t seed);

struct StageWords {
    std::uint64_t stage = 0, reference = 0;
    Rope v1, v2;
    std::vector<Rope> z, w;
    BigInt h1, H_prev, H;
    std::uint64_t C = 1;
};

StageWords coding_words(const RankTwoSystem& sys, std::uint64_t reference_stage);

// Sliding windows over both tower codings at the reference partition, weighted by width.
// Windows that run past a tower top are unaccounted. Both codings are materialized.
CodedDistribution coded_distribution(const RankTwoSystem& sys, std::uint64_t partition_stage, std::size_t n);

// Exact normalised Hamming distance between w^{(i)} and w^{(j)} (i != j) via their periods.
Rational w_distance(const StageWords& sw, std::uint64_t i, std::uint64_t j, std::uint64_t cap = 1u << 22);
bool realigned(const StageWords& sw, std::uint64_t i, std::uint64_t j, const BigInt& m);

struct PairCheck {
    std::uint64_t i = 0, j = 0;
    Rational distance;
    double bound = 0;
    bool ok = false;
    BigInt first_realignment;
};

struct LemmaReport {
    std::optional<std::uint64_t> n_eff;
    bool certified = false;
    std::vector<std::string> notes;
    std::optional<Rational> alpha;
    std::uint64_t alpha_t = 0, t_max = 0;
    bool alpha_exhaustive = false;
    std::vector<PairCheck> pairs;
    bool all_pairs_ok = true;
    std::optional<Rational> ineq1_min, ineq2_min, ineq3_min;
    double product_1600 = 1, product_600 = 1;
};

struct LemmaOptions {
    std::uint64_t alpha_work_cap = 4'000'000'000ULL;
    std::uint64_t grid = 32;
    std::optional<std::uint64_t> n_eff_override;
};

LemmaReport check_alignment_lemmas(const StageWords& words, const RankTwoSystem& sys, const LemmaOptions& opts = {});

// Largest n >= 2 meeting the two inequalities behind the alignment bound, with C cuts.
std::optional<std::uint64_t> effective_index(const BigInt& h1, const BigInt& H_prev, std::uint64_t C);

struct MassEntry {
    std::uint64_t n = 0;
    Rational spacer_added, total_after, ratio;
    bool ratio_in_bounds = false, exchange_ok = false, spacer_bound_ok = false;
};

struct MassReport {
    std::vector<MassEntry> entries;
    Rational initial_total, current_total, ledger_total;
    bool conserved = false;
    Rational ratio;
    bool ratio_in_bounds = false;
    double total_bound = 0;  // (mu(S1)+mu(S2)) prod (1 + 1/(n+1)^14)
    bool asserted = false;   // bounds are assertions only under the paper profile
};

MassReport mass_report(const RankTwoSystem& sys);

struct CutColumn {
    std::vector<int> ids;  // 1 or 2 per stacked copy, bottom to top
    Rational width;
};

struct NoSpacerResult {
    std::vector<TowerCoding> towers;
    std::uint64_t L = 0;
    std::size_t atoms = 0;
    CoverReport cover;
    std::uint64_t bound = 0;  // h1 + h2
    bool ok = false;
};

NoSpacerResult nospacer_baseline(std::uint64_t h1, std::uint64_t h2, const Rational& w1, const Rational& w2,
                                 const std::vector<CutColumn>& plan, const Rational& eps);

nlohmann::json trace_to_json(const StageTrace& t);
nlohmann::json system_to_json(const RankTwoSystem& sys);
RankTwoSystem system_from_json(const nlohmann::json& j);

}  // namespace slowent
