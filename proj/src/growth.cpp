#include "slowent/growth.hpp"

#include <cmath>
#include <limits>

namespace slowent {

GrowthSequence GrowthSequence::polynomial(Rational exponent, Rational coef) {
    GrowthSequence g;
    g.exponent = exponent;
    g.coef = coef;
    g.validate();
    return g;
}

GrowthSequence GrowthSequence::index_power(Rational t, BigInt mult, BigInt offset) {
    GrowthSequence g;
    g.exponent = t;
    g.mult = mult;
    g.offset = offset;
    g.validate();
    return g;
}

GrowthSequence GrowthSequence::from_table(std::vector<Rational> values) {
    GrowthSequence g;
    g.kind = Kind::table;
    g.table = std::move(values);
    g.validate();
    return g;
}

void GrowthSequence::validate() const {
    if (kind == Kind::table) {
        if (table.empty()) throw Error("growth table is empty");
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (table[i] <= 0) throw Error("growth table values must be positive");
            if (i && table[i] < table[i - 1]) throw Error("growth table must be nondecreasing");
        }
        return;
    }
    if (exponent < 0) throw Error("growth exponent must be >= 0");
    if (coef <= 0) throw Error("growth coefficient must be positive");
    if (mult <= 0 || offset < 0) throw Error("growth index map must be positive");
}

double GrowthSequence::log_value(std::uint64_t n) const {
    if (kind == Kind::table) {
        if (n < 1 || n > table.size())
            throw Error("growth table has no entry for n=" + std::to_string(n));
        return std::log(to_double(table[n - 1]));
    }
    BigInt idx = mult * (BigInt(n) + offset);
    if (idx <= 0) return exponent == 0 ? std::log(to_double(coef)) : -std::numeric_limits<double>::infinity();
    return std::log(to_double(coef)) + to_double(exponent) * log_big(idx);
}

double GrowthSequence::value(std::uint64_t n) const { return std::exp(log_value(n)); }

BigInt GrowthSequence::floor_value(std::uint64_t n) const {
    if (kind == Kind::table) {
        if (n < 1 || n > table.size())
            throw Error("growth table has no entry for n=" + std::to_string(n));
        return floor_rat(table[n - 1]);
    }
    BigInt idx = mult * (BigInt(n) + offset);
    // coef * idx^(a/b) = coef * (idx^a)^(1/b)
    BigInt a = num(exponent), b = den(exponent);
    if (bit_length(a) > 32 || bit_length(b) > 32) throw Error("growth exponent too large");
    unsigned au = a.convert_to<unsigned>(), bu = b.convert_to<unsigned>();
    if (static_cast<double>(au) * static_cast<double>(bit_length(idx)) > 4.0e6)
        throw Error("growth value exceeds the bit budget");
    return floor_mul_root(coef, ipow(idx, au), bu);
}

std::uint64_t GrowthSequence::horizon() const {
    if (kind == Kind::table) return table.size();
    return std::numeric_limits<std::uint64_t>::max();
}

std::string GrowthSequence::describe() const {
    if (kind == Kind::table) return "table[" + std::to_string(table.size()) + "]";
    std::string s = to_string(coef) + "*(";
    s += mult.str() + "*(n+" + offset.str() + "))^" + to_string(exponent);
    return s;
}

}  // namespace slowent
