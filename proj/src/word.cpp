#include "slowent/word.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace slowent {

void Alphabet::validate() const {
    if (size < 1) throw Error("alphabet size must be >= 1");
    std::set<Symbol> seen;
    for (const auto& r : {b, e, spacer}) {
        if (!r) continue;
        if (*r >= size) throw Error("reserved symbol id out of range");
        if (!seen.insert(*r).second) throw Error("reserved symbol ids must be distinct");
    }
}

void Alphabet::check(const Word& w) const {
    for (Symbol s : w)
        if (s >= size) throw Error("symbol " + std::to_string(s) + " outside alphabet of size " +
                                   std::to_string(size));
}

std::size_t count_mismatches(const Word& a, std::size_t a_off, const Word& b, std::size_t b_off,
                             std::size_t len) {
    const Symbol* pa = a.data() + a_off;
    const Symbol* pb = b.data() + b_off;
    std::size_t m = 0;
    for (std::size_t i = 0; i < len; ++i) m += pa[i] != pb[i];
    return m;
}

bool strictly_close(std::uint64_t mism, std::uint64_t n, const Rational& eps) {
    return BigInt(mism) * den(eps) < num(eps) * n;
}

Rational hamming_distance(const Word& w, const Word& w2) {
    if (w.size() != w2.size()) throw Error("hamming_distance: length mismatch");
    if (w.empty()) throw Error("hamming_distance: empty words");
    return Rational(BigInt(count_mismatches(w, 0, w2, 0, w.size())), BigInt(w.size()));
}

Overlap overlap_distance(const Word& w, const Word& w2, std::size_t t) {
    if (w.size() != w2.size()) throw Error("overlap_distance: length mismatch");
    const std::size_t k = w.size();
    if (t >= k) throw Error("overlap_distance: shift t must be < k");
    const std::size_t len = k - t;
    std::size_t m = count_mismatches(w, t, w2, 0, len);
    return {{t, len}, Rational(BigInt(m), BigInt(len))};
}

std::uint64_t enumerate_ball(const Word& w, std::uint32_t sigma_size, const Rational& eps,
                             std::uint64_t cap) {
    const std::size_t n = w.size();
    if (sigma_size < 1) throw Error("enumerate_ball: empty alphabet");
    for (Symbol s : w)
        if (s >= sigma_size) throw Error("enumerate_ball: symbol outside alphabet");
    BigInt total = ipow(sigma_size, n);
    if (total > cap)
        throw Error("enumerate_ball: |Sigma|^n = " + total.str() + " exceeds cap " +
                    std::to_string(cap) + "; use ball_bound instead");
    // Odometer over all candidate words with an incremental mismatch count.
    std::vector<Symbol> cur(n, 0);
    std::uint64_t mism = 0;
    for (std::size_t i = 0; i < n; ++i) mism += cur[i] != w[i];
    std::uint64_t count = 0;
    const std::uint64_t tot = total.convert_to<std::uint64_t>();
    for (std::uint64_t idx = 0; idx < tot; ++idx) {
        if (n == 0 ? eps > 0 : strictly_close(mism, n, eps)) ++count;
        for (std::size_t i = 0; i < n; ++i) {
            mism -= cur[i] != w[i];
            if (++cur[i] == sigma_size) {
                cur[i] = 0;
                mism += cur[i] != w[i];
                continue;
            }
            mism += cur[i] != w[i];
            break;
        }
    }
    return count;
}

BallBound ball_bound(std::uint64_t n, std::uint64_t sigma_size, const Rational& eps) {
    if (eps <= 0 || eps >= Rational(1, 10)) throw Error("ball_bound: eps must lie in (0, 1/10)");
    if (sigma_size < 2) throw Error("ball_bound: alphabet size must be >= 2");
    const double e = to_double(eps);
    const double ls = std::log(static_cast<double>(sigma_size));
    const double per = 2 * e * ls - (1 - e) * std::log(1 - 2 * e) - 3 * e * std::log(e);
    BallBound out;
    out.log_value = static_cast<double>(n) * per;
    out.value = std::exp(out.log_value);
    if (eps >= Rational(1, sigma_size) && ls >= 1.0)
        out.simplified = std::pow(static_cast<double>(sigma_size), 9 * e * static_cast<double>(n));
    return out;
}

double q_exponent_sigma(double sigma_size, double eps) {
    return 4 * eps * std::log(sigma_size) - (1 - 2 * eps) * std::log(1 - 4 * eps) -
           6 * eps * std::log(2 * eps);
}

double q_exponent(std::uint64_t n, double eps) {
    return 24 * eps * std::log(static_cast<double>(n) + 1) - (1 - 2 * eps) * std::log(1 - 4 * eps) -
           6 * eps * std::log(2 * eps);
}

double q_bound(std::uint64_t n, std::uint64_t k) {
    if (n < 1 || k < 1) throw Error("q_bound: n and k must be >= 1");
    return std::exp(static_cast<double>(k) * q_exponent(n));
}

void write_words(std::ostream& os, const std::vector<Word>& words, std::uint32_t sigma,
                 std::optional<std::uint64_t> stage) {
    const std::size_t k = words.empty() ? 0 : words.front().size();
    os << "WORDS v1 sigma=" << sigma << " k=" << k << " N=" << words.size();
    if (stage) os << " stage=" << *stage;
    os << '\n';
    for (const auto& w : words) {
        if (w.size() != k) throw Error("write_words: words of unequal length");
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i) os << ' ';
            os << w[i];
        }
        os << '\n';
    }
}

WordsFile read_words(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error("read_words: missing header");
    std::istringstream hs(line);
    std::string magic, ver;
    hs >> magic >> ver;
    if (magic != "WORDS" || ver != "v1") throw Error("read_words: bad header");
    WordsFile f;
    std::size_t n = 0;
    bool have_sigma = false, have_k = false, have_n = false;
    std::string field;
    while (hs >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw Error("read_words: bad header field " + field);
        std::string key = field.substr(0, eq);
        std::uint64_t v = std::stoull(field.substr(eq + 1));
        if (key == "sigma") f.sigma = static_cast<std::uint32_t>(v), have_sigma = true;
        else if (key == "k") f.k = v, have_k = true;
        else if (key == "N") n = v, have_n = true;
        else if (key == "stage") f.stage = v;
        else throw Error("read_words: unknown header field " + key);
    }
    if (!have_sigma || !have_k || !have_n) throw Error("read_words: incomplete header");
    f.words.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(is, line)) throw Error("read_words: truncated body");
        std::istringstream ls(line);
        Word w;
        w.reserve(f.k);
        std::uint64_t s;
        while (ls >> s) {
            if (s >= f.sigma) throw Error("read_words: symbol outside alphabet");
            w.push_back(static_cast<Symbol>(s));
        }
        if (w.size() != f.k) throw Error("read_words: word length differs from header k");
        f.words.push_back(std::move(w));
    }
    return f;
}

}  // namespace slowent
