#pragma once

#include "slowent/growth.hpp"
#include "slowent/word.hpp"

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace slowent {

using Rng = boost::random::mt19937_64;

struct SamplerParams {
    std::uint32_t sigma = 4;  // alphabet size
    std::size_t k = 0;
    std::size_t N = 0;
    Rational eps{1, 10};
    Rational gamma{1, 20};
    GrowthSequence b = GrowthSequence::polynomial(2);
    // Endstring budget; defaults to gamma^2/3 * (1 - 1e-6).
    std::optional<Rational> sigma_budget;

    Rational budget() const;
    // All sampler hypotheses (alphabet >= 4, eps <= 1/10, N <= b_k, ...).
    void validate() const;
};

struct ChernoffBounds {
    double two_sided = 1.0;
    double upper_tail = 1.0;
};
ChernoffBounds chernoff_bounds(std::uint64_t n, const Rational& p, const Rational& delta);

struct TauResult {
    std::uint64_t tau = 1;
    bool certified = true;  // false when only checked up to the scan cap / table range
    std::uint64_t checked_to = 0;
};
// Smallest tau with b_L / |Sigma|^{(1-18 eps) L} < 1 for every L >= tau.
TauResult tau_threshold(const GrowthSequence& b, std::uint32_t sigma, const Rational& eps,
                        std::uint64_t cap = 10'000'000);
// Same with the exact count of strictly 2eps-close words in place of |Sigma|^{18 eps L}.
TauResult tau_threshold_exact(const GrowthSequence& b, std::uint32_t sigma, const Rational& eps,
                              std::uint64_t cap = 4096);

struct WindowThresholds {
    std::uint64_t L3_min = 0;
    std::uint64_t L4_max = 0;
    std::uint64_t beta = 0;
};
WindowThresholds window_thresholds(const SamplerParams& params);

struct K0Result {
    std::uint64_t k0 = 0;
    double log_failure = 0;  // natural log of the bound at k0
};
K0Result k0_estimate(const GrowthSequence& b, std::uint32_t sigma, const Rational& eps,
                     const Rational& gamma, std::uint64_t cap = 1ULL << 40);
// log of the failure bound at one k (exposed for tests and reports).
double k0_log_failure(const GrowthSequence& b, std::uint32_t sigma, const Rational& eps,
                      const Rational& gamma, std::uint64_t k);

struct Witness {
    std::size_t w = 0, w2 = 0, t = 0, start = 0, length = 0;
    bool operator<(const Witness& o) const;
    bool operator==(const Witness& o) const = default;
};

struct SeparationResult {
    bool vacuous = true;  // no qualifying (pair, shift, interval)
    bool evaluated = false;
    bool aborted = false;
    Rational min_distance = 1;
    Witness witness;
    Rational threshold = 0;
    bool ok() const { return !evaluated ? false : (vacuous || min_distance >= threshold); }
};

struct ShortResult {
    bool vacuous = true;
    bool evaluated = false;
    Rational worst_proportion = 0;
    double worst_scaled = 0;  // proportion * b_L / 2; <= 1 means within the bound
    std::uint64_t close = 0, total = 0;
    Witness witness;  // w, t = start, length = L
    bool ok() const { return evaluated && (vacuous || worst_scaled <= 1.0); }
};

struct VerificationReport {
    bool uniformity_ok = false;
    std::optional<std::size_t> uniformity_witness;
    bool distinct_ok = false;
    SeparationResult substantial;    // property (2)
    SeparationResult intermediate;   // property (3)
    ShortResult short_eps;           // property (4), stated eps radius
    ShortResult short_2eps;          // property (4), 2 eps variant (informational)
    std::string mode = "exhaustive";
    std::uint64_t samples = 0;
    std::uint64_t sample_seed = 0;
    bool passed() const;
};

struct VerifyOptions {
    enum class Mode { automatic, exhaustive, sampled };
    Mode mode = Mode::automatic;
    std::uint64_t samples = 200000;
    std::uint64_t sample_seed = 0;
    unsigned threads = 1;
    // Stop property (2) as soon as its value drops below this (used by retries).
    std::optional<Rational> abort_below;
    bool skip_after_failure = false;
    // Smaller-growth variant: property (4) limit uses this sequence instead of params.b.
    std::optional<GrowthSequence> c_override;
};

VerificationReport verify_collection(const std::vector<Word>& theta, const SamplerParams& params,
                                     std::uint64_t tau, std::uint64_t beta,
                                     const VerifyOptions& opts = {});

// Recomputes the distance recorded by a separation witness.
Rational replay_separation(const std::vector<Word>& theta, const Witness& w);
// Recomputes the close proportion recorded by a short-substring witness.
Rational replay_short(const std::vector<Word>& theta, const SamplerParams& params,
                      const Witness& w, const Rational& radius);

struct WordCollection {
    std::vector<Word> theta;
    std::uint64_t tau = 1;
    std::uint64_t beta = 1;
    SamplerParams params;
    VerificationReport report;
    std::string tau_source;   // "analytic" | "exact_count"
    std::string beta_source;  // "window_thresholds" | "fallback_gamma_k"
    std::uint64_t attempts = 0;
    std::uint64_t seed = 0;
};

struct SampleOptions {
    std::uint64_t retry_budget = 64;
    unsigned threads = 1;
    VerifyOptions::Mode mode = VerifyOptions::Mode::automatic;
};

// Thrown when the retry budget runs out; carries the best failing attempt.
struct SamplerExhausted : Error {
    WordCollection best;
    explicit SamplerExhausted(WordCollection b);
};

// Thresholds used by sample_collection (exposed so callers can verify with them).
struct Thresholds {
    std::uint64_t tau = 1, beta = 1;
    std::string tau_source, beta_source;
};
Thresholds collection_thresholds(const SamplerParams& params);

// Draws one exactly uniform word of length k (prefix conditioned, endstring repaired).
Word draw_uniform_word(std::uint32_t sigma, std::size_t k, std::size_t r, Rng& rng,
                       std::size_t* repaired = nullptr);

WordCollection sample_collection(const SamplerParams& params, std::uint64_t seed,
                                 const SampleOptions& opts = {});

// N distinct exactly-uniform words (shuffles of the balanced multiset); no separation check.
std::vector<Word> sample_uniform_distinct(std::uint32_t sigma, std::size_t k, std::size_t N,
                                          std::uint64_t seed, Symbol first_symbol = 0);
// Number of exactly uniform words of length k over sigma symbols.
BigInt uniform_word_count(std::uint32_t sigma, std::size_t k);

}  // namespace slowent
