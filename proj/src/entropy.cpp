#include "slowent/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace slowent {

void CodedDistribution::validate() const {
    Rational sum = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (atoms[i].first.size() != length) throw Error("distribution atom has the wrong length");
        if (atoms[i].second <= 0) throw Error("distribution atom mass must be positive");
        if (i && !(atoms[i - 1].first < atoms[i].first))
            throw Error("distribution atoms must be sorted and distinct");
        sum += atoms[i].second;
    }
    if (sum != accounted_mass) throw Error("distribution masses do not sum to accounted_mass");
    if (accounted_mass > 1) throw Error("accounted mass exceeds 1");
}

void DistributionBuilder::add(const Word& w, const Rational& weight) {
    if (w.size() != length_) throw Error("distribution window has the wrong length");
    items_.emplace_back(w, weight);
}

CodedDistribution DistributionBuilder::finish(const Rational& total_weight) const {
    if (total_weight <= 0) throw Error("distribution total weight must be positive");
    std::map<Word, Rational> agg;
    for (const auto& [w, m] : items_) agg[w] += m;
    CodedDistribution d;
    d.length = length_;
    for (auto& [w, m] : agg) {
        if (m <= 0) continue;
        d.atoms.emplace_back(w, m / total_weight);
        d.accounted_mass += m / total_weight;
    }
    if (d.accounted_mass > 1) throw Error("window weights exceed the total weight");
    return d;
}

CodedDistribution substring_distribution(const std::vector<Word>& words, std::size_t L) {
    if (L == 0) throw Error("substring length must be positive");
    DistributionBuilder b(L);
    std::uint64_t count = 0;
    for (const auto& w : words) {
        if (w.size() < L) throw Error("substring length exceeds word length");
        for (std::size_t i = 0; i + L <= w.size(); ++i, ++count)
            b.add(Word(w.begin() + i, w.begin() + i + L), 1);
    }
    if (count == 0) throw Error("no words");
    return b.finish(Rational(count));
}

CodedDistribution tower_distribution(const std::vector<TowerCoding>& towers, std::size_t n) {
    if (n == 0) throw Error("window length must be positive");
    std::size_t horizon = 0;
    Rational total = 0;
    for (const auto& t : towers) {
        if (t.width < 0) throw Error("tower width must be nonnegative");
        horizon = std::max(horizon, t.coding.size());
        total += t.width * t.coding.size();
    }
    if (n > horizon)
        throw Error("window length " + std::to_string(n) + " exceeds the tower horizon " +
                    std::to_string(horizon));
    DistributionBuilder b(n);
    for (const auto& t : towers) {
        if (t.width == 0) continue;
        for (std::size_t i = 0; i + n <= t.coding.size(); ++i)
            b.add(Word(t.coding.begin() + i, t.coding.begin() + i + n), t.width);
    }
    return b.finish(total);
}

CodedDistribution cyclic_name_distribution(const std::vector<Word>& names, std::size_t n) {
    if (names.empty()) throw Error("no names");
    const std::size_t q = names[0].size();
    if (n == 0 || n > q) throw Error("window length must lie in [1, name length]");
    DistributionBuilder b(n);
    for (const auto& u : names) {
        if (u.size() != q) throw Error("names must have equal length");
        for (std::size_t i = 0; i < q; ++i) {
            Word w(n);
            for (std::size_t j = 0; j < n; ++j) w[j] = u[(i + j) % q];
            b.add(w, 1);
        }
    }
    return b.finish(Rational(names.size() * q));
}

namespace {

// Masses as integers over a common denominator; need = smallest covered numerator that
// exceeds 1 - mass_eps.
struct Scaled {
    BigInt denom;
    std::vector<BigInt> nums;
    BigInt need;
};

Scaled scale(const CodedDistribution& d, const Rational& mass_eps) {
    Scaled s;
    s.denom = 1;
    for (const auto& a : d.atoms) s.denom = lcm(s.denom, den(a.second));
    s.denom = lcm(s.denom, den(mass_eps));
    for (const auto& a : d.atoms) s.nums.push_back(num(a.second) * (s.denom / den(a.second)));
    s.need = floor_rat((1 - mass_eps) * s.denom) + 1;
    return s;
}

std::vector<std::vector<std::uint32_t>> ball_lists(const CodedDistribution& d, const Rational& eps) {
    const std::size_t n = d.atoms.size(), L = d.length;
    // strictly close iff mism <= lim
    const BigInt c = ceil_rat(eps * L) - 1;
    const long long lim = c < 0 ? -1 : c.convert_to<long long>();
    std::vector<std::vector<std::uint32_t>> ball(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (lim >= 0) ball[i].push_back(static_cast<std::uint32_t>(i));
        for (std::size_t j = i + 1; j < n; ++j) {
            const Word& a = d.atoms[i].first;
            const Word& b = d.atoms[j].first;
            long long m = 0;
            for (std::size_t p = 0; p < L && m <= lim; ++p) m += a[p] != b[p];
            if (m <= lim) {
                ball[i].push_back(static_cast<std::uint32_t>(j));
                ball[j].push_back(static_cast<std::uint32_t>(i));
            }
        }
    }
    for (auto& b : ball) std::sort(b.begin(), b.end());
    return ball;
}

void check_pre(const CodedDistribution& dist, const Rational& eps, const Rational& mass_eps) {
    dist.validate();
    if (eps <= 0) throw Error("cover radius must be positive");
    if (mass_eps <= 0 || mass_eps > 1) throw Error("cover mass slack must lie in (0, 1]");
    if (dist.accounted_mass <= 1 - mass_eps)
        throw Error("cannot certify a cover: accounted mass " + to_string(dist.accounted_mass) +
                    " is not above " + to_string(1 - mass_eps));
}

Rational mass_of(const CodedDistribution& d, const std::vector<char>& covered) {
    Rational m = 0;
    for (std::size_t i = 0; i < covered.size(); ++i)
        if (covered[i]) m += d.atoms[i].second;
    return m;
}

template <class I>
std::vector<std::uint32_t> greedy_select(const std::vector<std::vector<std::uint32_t>>& ball,
                                         const std::vector<I>& mass, const I& need) {
    const std::size_t n = mass.size();
    std::vector<I> gain(n, I(0));
    for (std::size_t c = 0; c < n; ++c)
        for (auto a : ball[c]) gain[c] += mass[a];
    std::vector<char> covered(n, 0);
    I got = 0;
    std::vector<std::uint32_t> picks;
    while (got < need) {
        std::size_t best = n;
        for (std::size_t c = 0; c < n; ++c)
            if (gain[c] > 0 && (best == n || gain[c] > gain[best])) best = c;
        if (best == n) throw Error("greedy cover stalled before reaching the mass threshold");
        picks.push_back(static_cast<std::uint32_t>(best));
        for (auto a : ball[best]) {
            if (covered[a]) continue;
            covered[a] = 1;
            got += mass[a];
            for (auto c : ball[a]) gain[c] -= mass[a];
        }
    }
    return picks;
}

bool fits_i128(const Scaled& s) {
    BigInt total = 0;
    for (const auto& x : s.nums) total += x;
    return bit_length(total) < 120 && bit_length(s.need) < 120;
}

__int128 to_i128(const BigInt& v) {
    __int128 r = 0;
    BigInt x = v;
    int shift = 0;
    while (x > 0) {
        r |= static_cast<__int128>(static_cast<std::uint64_t>(x & 0xFFFFFFFFFFFFFFFFULL)) << shift;
        x >>= 64;
        shift += 64;
    }
    return r;
}

CoverReport make_report(const CodedDistribution& d, const Rational& eps, const Rational& mass_eps,
                        std::vector<std::uint32_t> picks,
                        const std::vector<std::vector<std::uint32_t>>& ball, const char* method) {
    std::sort(picks.begin(), picks.end());
    CoverReport r;
    r.eps = eps;
    r.mass_eps = mass_eps;
    r.S = picks.size();
    r.method = method;
    std::vector<char> cov(d.atoms.size(), 0);
    for (auto c : picks) {
        r.centers.push_back(d.atoms[c].first);
        for (auto a : ball[c]) cov[a] = 1;
    }
    r.covered_mass = mass_of(d, cov);
    return r;
}

std::vector<std::uint32_t> greedy_picks(const std::vector<std::vector<std::uint32_t>>& ball,
                                        const Scaled& s) {
    if (fits_i128(s)) {
        std::vector<__int128> m;
        for (const auto& x : s.nums) m.push_back(to_i128(x));
        return greedy_select<__int128>(ball, m, to_i128(s.need));
    }
    return greedy_select<BigInt>(ball, s.nums, s.need);
}

}  // namespace

CoverReport greedy_cover(const CodedDistribution& dist, const Rational& eps,
                         std::optional<Rational> mass_eps) {
    const Rational me = mass_eps.value_or(eps);
    check_pre(dist, eps, me);
    auto ball = ball_lists(dist, eps);
    Scaled s = scale(dist, me);
    return make_report(dist, eps, me, greedy_picks(ball, s), ball, "greedy");
}

CoverReport exact_cover_small(const CodedDistribution& dist, const Rational& eps,
                              std::optional<Rational> mass_eps) {
    const Rational me = mass_eps.value_or(eps);
    check_pre(dist, eps, me);
    const std::size_t n = dist.atoms.size();
    if (n > kExactCoverCap)
        throw Error("exact cover supports at most " + std::to_string(kExactCoverCap) +
                    " atoms, got " + std::to_string(n));
    auto ball = ball_lists(dist, eps);
    Scaled s = scale(dist, me);
    if (!fits_i128(s)) throw Error("exact cover: masses too fine for the integer search");
    std::vector<__int128> mass;
    for (const auto& x : s.nums) mass.push_back(to_i128(x));
    const __int128 need = to_i128(s.need);
    auto upper = greedy_select<__int128>(ball, mass, need);

    std::vector<std::uint32_t> mask(n, 0);
    for (std::size_t c = 0; c < n; ++c)
        for (auto a : ball[c]) mask[c] |= 1u << a;
    auto mmass = [&](std::uint32_t m) {
        __int128 t = 0;
        for (std::size_t a = 0; a < n; ++a)
            if (m >> a & 1u) t += mass[a];
        return t;
    };
    // Drop balls contained in another ball (ties keep the smaller index).
    std::vector<std::uint32_t> cand;
    for (std::size_t a = 0; a < n; ++a) {
        bool dominated = false;
        for (std::size_t b = 0; b < n && !dominated; ++b) {
            if (a == b || (mask[a] & ~mask[b])) continue;
            dominated = mask[a] != mask[b] || b < a;
        }
        if (!dominated) cand.push_back(static_cast<std::uint32_t>(a));
    }
    std::vector<__int128> cm;
    for (auto c : cand) cm.push_back(mmass(mask[c]));
    std::vector<std::size_t> order(cand.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return cm[x] > cm[y]; });
    std::vector<std::uint32_t> cs;
    std::vector<__int128> cms;
    for (auto i : order) {
        cs.push_back(cand[i]);
        cms.push_back(cm[i]);
    }
    const std::size_t m = cs.size();

    std::vector<std::uint32_t> chosen, found;
    // DFS over combinations of exactly `size` candidates in order.
    std::function<bool(std::size_t, std::size_t, std::uint32_t)> dfs =
        [&](std::size_t from, std::size_t left, std::uint32_t cov) -> bool {
        __int128 have = mmass(cov);
        if (have >= need) {
            found = chosen;
            return true;
        }
        if (left == 0) return false;
        for (std::size_t i = from; i + left <= m; ++i) {
            __int128 bound = have;
            for (std::size_t j = i; j < i + left; ++j) bound += cms[j];
            if (bound < need) break;  // masses are sorted, later starts are no better
            chosen.push_back(cs[i]);
            if (dfs(i + 1, left - 1, cov | mask[cs[i]])) return true;
            chosen.pop_back();
        }
        return false;
    };
    for (std::size_t size = 1; size < upper.size(); ++size) {
        chosen.clear();
        if (dfs(0, size, 0)) return make_report(dist, eps, me, found, ball, "exact");
    }
    return make_report(dist, eps, me, upper, ball, "exact");
}

bool verify_cover(const CodedDistribution& dist, const CoverReport& rep) {
    if (rep.centers.size() != rep.S) return false;
    const std::size_t L = dist.length;
    std::vector<char> cov(dist.atoms.size(), 0);
    for (const auto& c : rep.centers) {
        if (c.size() != L) return false;
        bool realized = false;
        for (std::size_t a = 0; a < dist.atoms.size(); ++a) {
            const Word& w = dist.atoms[a].first;
            if (w == c) realized = true;
            std::size_t m = 0;
            for (std::size_t p = 0; p < L; ++p) m += w[p] != c[p];
            if (strictly_close(m, L, rep.eps)) cov[a] = 1;
        }
        if (!realized) return false;
    }
    Rational got = mass_of(dist, cov);
    return got == rep.covered_mass && got > 1 - rep.mass_eps;
}

ScalingFunction ScalingFunction::polynomial() {
    ScalingFunction s;
    s.name = "n^t";
    s.log_a = [](double n, double t) { return t * std::log(n); };
    return s;
}

ScalingFunction ScalingFunction::custom(std::string name, std::function<double(double, double)> log_a,
                                        bool subexponential_certified) {
    if (!subexponential_certified)
        throw Error("scaling function " + name + " lacks a subexponential growth certificate");
    ScalingFunction s;
    s.name = std::move(name);
    s.log_a = std::move(log_a);
    return s;
}

EntropyProfile slow_entropy_profile(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& S_values,
                                    const ScalingFunction& scale, const std::vector<Rational>& t_grid,
                                    double threshold) {
    if (S_values.size() < 2) throw Error("slow_entropy_profile needs at least two sample lengths");
    EntropyProfile p;
    p.scale = scale.name;
    p.threshold = threshold;
    for (const auto& t : t_grid) {
        ProfileRow row;
        row.t = t;
        row.min_ratio = std::numeric_limits<double>::infinity();
        row.max_ratio = 0;
        for (const auto& [n, S] : S_values) {
            double r = std::exp(std::log(static_cast<double>(S)) -
                                scale.log_a(static_cast<double>(n), to_double(t)));
            row.min_ratio = std::min(row.min_ratio, r);
            row.max_ratio = std::max(row.max_ratio, r);
        }
        if (row.min_ratio > threshold && t > p.t_estimate) p.t_estimate = t;
        p.rows.push_back(row);
    }
    return p;
}

}  // namespace slowent
