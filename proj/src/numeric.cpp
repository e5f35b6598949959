#include "slowent/numeric.hpp"

#include <cmath>

namespace slowent {

namespace mp = boost::multiprecision;

BigInt parse_bigint(const std::string& s) {
    if (s.empty()) throw Error("empty integer literal");
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) throw Error("bad integer literal: " + s);
    for (std::size_t j = i; j < s.size(); ++j)
        if (s[j] < '0' || s[j] > '9') throw Error("bad integer literal: " + s);
    return BigInt(s);
}

Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(parse_bigint(s));
    BigInt p = parse_bigint(s.substr(0, slash));
    BigInt q = parse_bigint(s.substr(slash + 1));
    if (q == 0) throw Error("zero denominator: " + s);
    return Rational(p, q);
}

std::string to_string(const BigInt& v) { return v.str(); }

std::string to_string(const Rational& r) {
    if (den(r) == 1) return num(r).str();
    return num(r).str() + "/" + den(r).str();
}

double log_big(const BigInt& v) {
    if (v <= 0) throw Error("log of non-positive integer");
    std::uint64_t bits = bit_length(v);
    if (bits <= 60) return std::log(static_cast<double>(v.convert_to<std::uint64_t>()));
    std::uint64_t shift = bits - 60;
    BigInt top = v >> shift;
    return std::log(static_cast<double>(top.convert_to<std::uint64_t>())) +
           static_cast<double>(shift) * std::log(2.0);
}

double to_double(const Rational& r) {
    if (r == 0) return 0.0;
    const BigInt p = num(r), q = den(r);
    if (bit_length(p) < 1000 && bit_length(q) < 1000) return r.convert_to<double>();
    double mag = std::exp(log_big(mp::abs(p)) - log_big(q));
    return p < 0 ? -mag : mag;
}

BigInt ipow(const BigInt& base, std::uint64_t e) {
    BigInt result = 1, b = base;
    while (e) {
        if (e & 1) result *= b;
        e >>= 1;
        if (e) b *= b;
    }
    return result;
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
    if (b == 0) throw Error("division by zero");
    BigInt q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

BigInt ceil_div(const BigInt& a, const BigInt& b) { return -floor_div(-a, b); }

BigInt floor_rat(const Rational& r) { return floor_div(num(r), den(r)); }
BigInt ceil_rat(const Rational& r) { return ceil_div(num(r), den(r)); }

BigInt gcd(const BigInt& a, const BigInt& b) { return mp::gcd(a, b); }

BigInt lcm(const BigInt& a, const BigInt& b) {
    if (a == 0 || b == 0) return 0;
    return mp::abs(a / gcd(a, b) * b);
}

BigInt mod_inverse(const BigInt& a, const BigInt& m) {
    if (m <= 0) throw Error("modulus must be positive");
    BigInt old_r = ((a % m) + m) % m, r = m;
    BigInt old_s = 1, s = 0;
    while (r != 0) {
        BigInt q = old_r / r;
        BigInt t = old_r - q * r;
        old_r = r;
        r = t;
        t = old_s - q * s;
        old_s = s;
        s = t;
    }
    if (old_r != 1) throw Error("gcd(p, q) != 1: no modular inverse");
    return ((old_s % m) + m) % m;
}

std::uint64_t bit_length(const BigInt& v) {
    if (v == 0) return 0;
    return mp::msb(mp::abs(v)) + 1;
}

BigInt floor_mul_root(const Rational& c, const BigInt& X, unsigned b) {
    if (c <= 0) throw Error("floor_mul_root: coefficient must be positive");
    if (X < 0) throw Error("floor_mul_root: negative radicand");
    if (b == 0) throw Error("floor_mul_root: zero root index");
    if (X == 0) return 0;
    // m^b * den^b <= num^b * X
    BigInt rhs = ipow(num(c), b) * X;
    BigInt dpow = ipow(den(c), b);
    auto ok = [&](const BigInt& m) { return ipow(m, b) * dpow <= rhs; };
    std::uint64_t bits = bit_length(rhs) / b + 2;
    BigInt hi = BigInt(1) << bits;
    while (ok(hi)) hi <<= 1;
    BigInt lo = 0;  // ok(lo) holds
    while (hi - lo > 1) {
        BigInt mid = (lo + hi) >> 1;
        if (ok(mid)) lo = mid; else hi = mid;
    }
    return lo;
}

std::uint64_t to_u64(const BigInt& v, const char* what) {
    if (v < 0 || bit_length(v) > 64) throw Error(std::string(what) + " does not fit in 64 bits");
    return v.convert_to<std::uint64_t>();
}

}  // namespace slowent
