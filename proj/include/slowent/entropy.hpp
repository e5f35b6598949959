#pragma once

#include "slowent/word.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace slowent {

// Masses are fractions of the whole space; accounted_mass < 1 when some windows
// could not be decoded at the current stage.
struct CodedDistribution {
    std::size_t length = 0;
    std::vector<std::pair<Word, Rational>> atoms;  // sorted by word, distinct
    Rational accounted_mass = 0;

    void validate() const;
};

// Aggregates (word, weight) occurrences; masses are normalised by total_weight.
class DistributionBuilder {
public:
    explicit DistributionBuilder(std::size_t length) : length_(length) {}
    void add(const Word& w, const Rational& weight);
    CodedDistribution finish(const Rational& total_weight) const;

private:
    std::size_t length_;
    std::vector<std::pair<Word, Rational>> items_;
};

// Every sliding L-substring of every word, one unit of weight per occurrence.
CodedDistribution substring_distribution(const std::vector<Word>& words, std::size_t L);

struct TowerCoding {
    Word coding;  // bottom to top, length = height
    Rational width;
};
// Windows of length n starting at each level; a window running past the top of its
// tower is left unaccounted.
CodedDistribution tower_distribution(const std::vector<TowerCoding>& towers, std::size_t n);

// Cyclic windows over stage names, each (name, start) weighted 1 / (count * length).
CodedDistribution cyclic_name_distribution(const std::vector<Word>& names, std::size_t n);

struct CoverReport {
    Rational eps;       // ball radius (strict)
    Rational mass_eps;  // required covered mass > 1 - mass_eps
    std::uint64_t S = 0;
    std::vector<Word> centers;
    Rational covered_mass = 0;
    std::string method;  // "greedy" | "exact"
};

CoverReport greedy_cover(const CodedDistribution& dist, const Rational& eps,
                         std::optional<Rational> mass_eps = std::nullopt);

constexpr std::size_t kExactCoverCap = 24;
CoverReport exact_cover_small(const CodedDistribution& dist, const Rational& eps,
                              std::optional<Rational> mass_eps = std::nullopt);

// Recomputes covered mass from the centers; true when it matches and exceeds 1 - mass_eps.
bool verify_cover(const CodedDistribution& dist, const CoverReport& rep);

struct ScalingFunction {
    std::string name = "n^t";
    std::function<double(double n, double t)> log_a;  // natural log of a_n(t)
    bool subexponential = true;

    static ScalingFunction polynomial();
    // User form; the caller vouches for subexponential growth.
    static ScalingFunction custom(std::string name, std::function<double(double, double)> log_a,
                                  bool subexponential_certified);
};

struct ProfileRow {
    Rational t;
    double min_ratio = 0, max_ratio = 0;
};

// Finite-stage diagnostic: min and max of S(n)/a_n(t) over the sampled lengths.
struct EntropyProfile {
    std::string scale;
    std::vector<ProfileRow> rows;
    // Largest t on the grid with min ratio above the threshold (0 if none).
    Rational t_estimate = 0;
    double threshold = 0;
    std::string label = "empirical diagnostic over sampled n, not a limit";
};

EntropyProfile slow_entropy_profile(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& S_values,
                                    const ScalingFunction& scale, const std::vector<Rational>& t_grid,
                                    double threshold);

}  // namespace slowent
