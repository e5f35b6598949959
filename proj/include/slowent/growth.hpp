#pragma once

#include "slowent/numeric.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace slowent {

// b_n = coef * (mult * (n + offset))^exponent, or an explicit table b_1, b_2, ...
struct GrowthSequence {
    enum class Kind { polynomial, table };
    Kind kind = Kind::polynomial;
    Rational exponent = 1;
    Rational coef = 1;
    BigInt mult = 1;
    BigInt offset = 0;
    std::vector<Rational> table;

    static GrowthSequence polynomial(Rational exponent, Rational coef = 1);
    // a_{(n + offset) * mult}(t) with a_m(t) = m^t.
    static GrowthSequence index_power(Rational t, BigInt mult, BigInt offset);
    static GrowthSequence from_table(std::vector<Rational> values);

    void validate() const;
    double log_value(std::uint64_t n) const;
    double value(std::uint64_t n) const;
    // Exact floor of b_n.
    BigInt floor_value(std::uint64_t n) const;
    // Last n for which a table value exists; unbounded for closed forms.
    std::uint64_t horizon() const;
    std::string describe() const;
};

}  // namespace slowent
