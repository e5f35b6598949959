#pragma once

#include "slowent/numeric.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace slowent {

using Symbol = std::uint32_t;
using Word = std::vector<Symbol>;

struct Alphabet {
    std::uint32_t size = 1;
    // Reserved spacer ids: b and e for AbC names, plain spacer 0 for codings.
    std::optional<Symbol> b, e, spacer;

    void validate() const;
    void check(const Word& w) const;
};

struct IndexInterval {
    std::size_t start = 0;
    std::size_t length = 0;
};

// Counts positions i < len with a[a_off + i] != b[b_off + i].
std::size_t count_mismatches(const Word& a, std::size_t a_off, const Word& b, std::size_t b_off,
                             std::size_t len);

// Strict ball membership: mism / n < eps.
bool strictly_close(std::uint64_t mism, std::uint64_t n, const Rational& eps);

Rational hamming_distance(const Word& w, const Word& w2);

struct Overlap {
    IndexInterval interval;
    Rational distance;
};

// Position i of w (i in [t, k)) is compared with position i - t of w2.
Overlap overlap_distance(const Word& w, const Word& w2, std::size_t t);

// Exhaustive count of words at distance strictly below eps.
std::uint64_t enumerate_ball(const Word& w, std::uint32_t sigma_size, const Rational& eps,
                             std::uint64_t cap = 10'000'000);

struct BallBound {
    double value = 1.0;
    double log_value = 0.0;
    std::optional<double> simplified;  // |Sigma|^{9 eps n}, when applicable
};

BallBound ball_bound(std::uint64_t n, std::uint64_t sigma_size, const Rational& eps);

// Per-symbol exponent of Q_{n,k}; Q = exp(k * q_exponent(n)).
double q_exponent(std::uint64_t n, double eps = 1.0 / 1000.0);
double q_bound(std::uint64_t n, std::uint64_t k);
// Same shape for an arbitrary alphabet size (radius 2 eps).
double q_exponent_sigma(double sigma_size, double eps);

// WORDS v1 line format.
void write_words(std::ostream& os, const std::vector<Word>& words, std::uint32_t sigma,
                 std::optional<std::uint64_t> stage = std::nullopt);
struct WordsFile {
    std::uint32_t sigma = 0;
    std::size_t k = 0;
    std::optional<std::uint64_t> stage;
    std::vector<Word> words;
};
WordsFile read_words(std::istream& is);

}  // namespace slowent
