#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace slowent {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "p/q" or "p" (integers in decimal); whitespace is not allowed.
Rational parse_rational(const std::string& s);
std::string to_string(const Rational& r);
BigInt parse_bigint(const std::string& s);
std::string to_string(const BigInt& v);

inline BigInt num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt den(const Rational& r) { return boost::multiprecision::denominator(r); }

double to_double(const Rational& r);
// Natural log of a positive big integer; exact enough for bounds.
double log_big(const BigInt& v);

BigInt ipow(const BigInt& base, std::uint64_t e);
BigInt floor_div(const BigInt& a, const BigInt& b);
BigInt ceil_div(const BigInt& a, const BigInt& b);
BigInt floor_rat(const Rational& r);
BigInt ceil_rat(const Rational& r);
BigInt gcd(const BigInt& a, const BigInt& b);
BigInt lcm(const BigInt& a, const BigInt& b);
// Inverse of a modulo m in [0, m); throws when gcd(a, m) != 1.
BigInt mod_inverse(const BigInt& a, const BigInt& m);

// Largest m >= 0 with m <= c * X^(1/b), c > 0 rational, X >= 0, b >= 1.
BigInt floor_mul_root(const Rational& c, const BigInt& X, unsigned b);

// Number of bits of |v|.
std::uint64_t bit_length(const BigInt& v);

std::uint64_t to_u64(const BigInt& v, const char* what);

}  // namespace slowent
