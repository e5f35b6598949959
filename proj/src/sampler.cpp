#include "slowent/sampler.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace slowent {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

std::uint64_t ceil_u64(const Rational& r) { return to_u64(ceil_rat(r), "ceiling"); }
std::uint64_t floor_u64(const Rational& r) { return to_u64(floor_rat(r), "floor"); }

// Largest L <= gamma*k with b_L below the combined property (3)/(4) bound.
std::uint64_t l4_max(const GrowthSequence& b, std::uint32_t sigma, const Rational& eps,
                     const Rational& gamma, std::uint64_t k) {
    const double p = 1.0 / sigma;
    const double e = to_double(eps);
    const double lb = b.log_value(k), lk = std::log(static_cast<double>(k));
    const double log_rhs =
        std::log(1 - e - p) + lb + lk - std::log(40.0) - 2 * std::log(lb + lk);
    std::uint64_t top = floor_u64(gamma * k);
    top = std::min<std::uint64_t>(top, b.horizon());
    for (std::uint64_t L = top; L >= 1; --L)
        if (b.log_value(L) < log_rhs) return L;
    return 0;
}

std::uint64_t l3_min(const GrowthSequence& b, std::uint32_t sigma, const Rational& eps,
                     std::uint64_t k) {
    const double p = 1.0 / sigma;
    const double e = to_double(eps);
    const double v = 8 * (b.log_value(k) + std::log(static_cast<double>(k))) / (1 - e - p);
    return static_cast<std::uint64_t>(std::ceil(v)) + 1;
}

}  // namespace

Rational SamplerParams::budget() const {
    if (sigma_budget) return *sigma_budget;
    return gamma * gamma / 3 * Rational(999999, 1000000);
}

void SamplerParams::validate() const {
    if (sigma < 4) throw Error("alphabet must have at least 4 symbols");
    if (k == 0 || k % sigma != 0) throw Error("k must be a positive multiple of the alphabet size");
    if (eps <= 0 || eps > Rational(1, 10)) throw Error("eps must lie in (0, 1/10]");
    if (gamma <= 0 || gamma >= 1) throw Error("gamma must lie in (0, 1)");
    if (budget() <= 0 || budget() >= gamma * gamma / 3) throw Error("sigma must lie in (0, gamma^2/3)");
    b.validate();
    if (N == 0) throw Error("N must be positive");
    if (BigInt(N) > b.floor_value(k)) throw Error("N must not exceed b_k");
}

ChernoffBounds chernoff_bounds(std::uint64_t n, const Rational& p, const Rational& delta) {
    const double nd = static_cast<double>(n), d = to_double(delta), pd = to_double(p);
    return {std::exp(-nd * d * d / 4), std::exp(-(d * d / (2 + d)) * nd * pd)};
}

TauResult tau_threshold(const GrowthSequence& b, std::uint32_t sigma, const Rational& eps,
                        std::uint64_t cap) {
    if (18 * eps >= 1) throw Error("tau_threshold: 18*eps >= 1 makes the bound vacuous");
    if (sigma < 2) throw Error("tau_threshold: alphabet size must be >= 2");
    const double rate = (1 - 18 * to_double(eps)) * std::log(static_cast<double>(sigma));
    auto f = [&](std::uint64_t L) { return b.log_value(L) - rate * static_cast<double>(L); };
    TauResult out;
    std::uint64_t last_fail = 0;
    if (b.kind == GrowthSequence::Kind::table) {
        for (std::uint64_t L = 1; L <= b.horizon(); ++L)
            if (f(L) >= 0) last_fail = L;
        out.tau = last_fail + 1;
        out.certified = false;
        out.checked_to = b.horizon();
        return out;
    }
    // f'(L) = c/(L + offset) - rate is decreasing, so once past the crossover and negative, f
    // stays negative.
    const double c = to_double(b.exponent);
    const double crossover = c / rate - to_double(Rational(b.offset));
    std::uint64_t L = 1;
    for (;; ++L) {
        if (L > cap) throw Error("tau_threshold: scan cap reached");
        bool neg = f(L) < 0;
        if (!neg) last_fail = L;
        if (neg && static_cast<double>(L) > crossover) break;
    }
    out.tau = last_fail + 1;
    out.checked_to = L;
    return out;
}

TauResult tau_threshold_exact(const GrowthSequence& b, std::uint32_t sigma, const Rational& eps,
                              std::uint64_t cap) {
    if (sigma < 2) throw Error("tau_threshold_exact: alphabet size must be >= 2");
    const double ls = std::log(static_cast<double>(sigma));
    const double lsm1 = std::log(static_cast<double>(sigma - 1));
    std::uint64_t last_fail = 0;
    const std::uint64_t top = std::min(cap, b.horizon());
    for (std::uint64_t L = 1; L <= top; ++L) {
        // j < 2 eps L  <=>  j <= ceil(2 eps L) - 1
        std::uint64_t J = ceil_u64(2 * eps * L) - 1;
        double logN = kNegInf;
        const double Ld = static_cast<double>(L);
        for (std::uint64_t j = 0; j <= std::min(J, L); ++j) {
            double jd = static_cast<double>(j);
            double term = std::lgamma(Ld + 1) - std::lgamma(jd + 1) - std::lgamma(Ld - jd + 1) +
                          jd * lsm1;
            logN = log_add(logN, term);
        }
        if (b.log_value(L) + logN >= Ld * ls) last_fail = L;
    }
    TauResult out;
    out.tau = last_fail + 1;
    out.certified = false;
    out.checked_to = top;
    return out;
}

WindowThresholds window_thresholds(const SamplerParams& params) {
    if (params.sigma < 4) throw Error("window_thresholds: alphabet must have at least 4 symbols");
    WindowThresholds w;
    w.L3_min = l3_min(params.b, params.sigma, params.eps, params.k);
    w.L4_max = l4_max(params.b, params.sigma, params.eps, params.gamma, params.k);
    if (w.L3_min >= w.L4_max) throw Error("k too small for requested growth sequence");
    w.beta = w.L4_max + 1;
    return w;
}

double k0_log_failure(const GrowthSequence& b, std::uint32_t sigma, const Rational& eps,
                      const Rational& gamma, std::uint64_t k) {
    const double s = sigma, p = 1.0 / s, e = to_double(eps), g = to_double(gamma);
    const double sig = g * g / 3 * (1 - 1e-6);
    const double kd = static_cast<double>(k), lk = std::log(kd);
    const double lb = b.log_value(k);
    const double N = std::exp(lb);
    double total = std::log(3.0) + 3 * lk + 2 * lb + 2 * std::log(s) - (sig * sig / 4) * g * kd;
    const std::uint64_t L3 = l3_min(b, sigma, eps, k);
    total = log_add(total, 2 * lb + 3 * lk - ((1 - e - p) / 2) * static_cast<double>(L3));
    const std::uint64_t L4 = l4_max(b, sigma, eps, gamma, k);
    std::uint64_t tau = 18 * eps < 1 ? tau_threshold(b, sigma, eps).tau
                                     : tau_threshold_exact(b, sigma, eps).tau;
    double worst = kNegInf;
    auto term = [&](std::uint64_t L) {
        return lb + 2 * lk - N * kd / (4 * b.value(L) * static_cast<double>(L));
    };
    // The term grows with b_L * L, so a non-decreasing closed form peaks at L4.
    if (b.kind == GrowthSequence::Kind::polynomial && b.exponent >= 0 && b.coef > 0) {
        if (tau <= L4) worst = term(L4);
    } else {
        for (std::uint64_t L = tau; L <= L4; ++L) worst = std::max(worst, term(L));
    }
    return log_add(total, worst);
}

K0Result k0_estimate(const GrowthSequence& b, std::uint32_t sigma, const Rational& eps,
                     const Rational& gamma, std::uint64_t cap) {
    const double target = std::log(0.5);
    auto passes = [&](std::uint64_t k, double* lf) {
        *lf = k0_log_failure(b, sigma, eps, gamma, k);
        return *lf < target && l3_min(b, sigma, eps, k) < l4_max(b, sigma, eps, gamma, k);
    };
    double best = std::numeric_limits<double>::infinity();
    double lf = 0;
    // Exponential search over multiples of sigma, then bisection below the first hit.
    const std::uint64_t max_m = cap / sigma;
    if (max_m == 0) throw Error("k0_estimate: cap below the alphabet size");
    std::uint64_t m_prev = 0, m = 1;
    while (!passes(m * sigma, &lf)) {
        best = std::min(best, lf);
        if (m == max_m)
            throw Error("k0_estimate: no k <= cap reaches failure bound 1/2 (best bound exp(" +
                        std::to_string(best) + "))");
        m_prev = m;
        m = std::min(max_m, m * 2);
    }
    std::uint64_t lo = m_prev, hi = m;  // lo fails (or 0), hi passes
    while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (passes(mid * sigma, &lf)) hi = mid; else lo = mid;
    }
    K0Result r;
    r.k0 = hi * sigma;
    r.log_failure = k0_log_failure(b, sigma, eps, gamma, r.k0);
    return r;
}

bool Witness::operator<(const Witness& o) const {
    return std::tie(w, w2, t, start, length) < std::tie(o.w, o.w2, o.t, o.start, o.length);
}

bool VerificationReport::passed() const {
    return uniformity_ok && distinct_ok && substantial.ok() && intermediate.ok() && short_eps.ok();
}

SamplerExhausted::SamplerExhausted(WordCollection b)
    : Error("retry budget exhausted without a passing collection"), best(std::move(b)) {}

Thresholds collection_thresholds(const SamplerParams& params) {
    Thresholds th;
    if (18 * params.eps < 1) {
        th.tau = tau_threshold(params.b, params.sigma, params.eps).tau;
        th.tau_source = "analytic";
    } else {
        th.tau = tau_threshold_exact(params.b, params.sigma, params.eps).tau;
        th.tau_source = "exact_count";
    }
    try {
        th.beta = window_thresholds(params).beta;
        th.beta_source = "window_thresholds";
    } catch (const Error&) {
        th.beta = ceil_u64(params.gamma * params.k);
        th.beta_source = "fallback_gamma_k";
    }
    th.beta = std::min<std::uint64_t>(std::max(th.beta, th.tau), params.k);
    return th;
}

namespace {

std::size_t uniform_index(Rng& rng, std::size_t n) {
    boost::random::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(rng);
}

template <class It>
void shuffle(It first, It last, Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) std::swap(first[i - 1], first[uniform_index(rng, i)]);
}

void compositions(std::size_t total, std::size_t parts, std::size_t cap_each,
                  std::vector<std::size_t>& cur, std::vector<std::vector<std::size_t>>& out,
                  std::size_t limit) {
    if (out.size() > limit) return;
    if (cur.size() + 1 == parts) {
        if (total <= cap_each) {
            cur.push_back(total);
            out.push_back(cur);
            cur.pop_back();
        }
        return;
    }
    for (std::size_t d = 0; d <= std::min(total, cap_each); ++d) {
        cur.push_back(d);
        compositions(total - d, parts, cap_each, cur, out, limit);
        cur.pop_back();
    }
}

}  // namespace

Word draw_uniform_word(std::uint32_t sigma, std::size_t k, std::size_t r, Rng& rng,
                       std::size_t* repaired) {
    if (sigma == 0 || k % sigma != 0) throw Error("draw_uniform_word: k must be a multiple of sigma");
    r = std::min(r, k);
    const std::size_t per = k / sigma;
    const std::size_t prefix = k - r;
    Word w;
    w.reserve(k);
    constexpr std::size_t kLimit = 200000;
    std::vector<std::vector<std::size_t>> comps;
    std::vector<std::size_t> cur;
    compositions(r, sigma, per, cur, comps, kLimit);
    if (comps.size() <= kLimit) {
        // Prefix counts c_x = per - d_x with weight prod_x per!/(per - d_x)!, i.e. the
        // multinomial law of a uniform prefix conditioned on c_x <= per.
        std::vector<BigInt> cum;
        BigInt acc = 0;
        for (const auto& d : comps) {
            BigInt wt = 1;
            for (std::size_t x = 0; x < sigma; ++x)
                for (std::size_t i = 0; i < d[x]; ++i) wt *= BigInt(per - i);
            acc += wt;
            cum.push_back(acc);
        }
        boost::random::uniform_int_distribution<BigInt> pick(0, acc - 1);
        BigInt u = pick(rng);
        std::size_t idx = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
        const auto& d = comps[idx];
        for (std::size_t x = 0; x < sigma; ++x) w.insert(w.end(), per - d[x], static_cast<Symbol>(x));
        shuffle(w.begin(), w.end(), rng);
    } else {
        // Large endstring budget: rejection is cheap enough here.
        for (std::size_t tries = 0;; ++tries) {
            if (tries > 100000) throw Error("draw_uniform_word: conditioned prefix rejection failed");
            w.clear();
            std::vector<std::size_t> cnt(sigma, 0);
            bool ok = true;
            for (std::size_t i = 0; i < prefix && ok; ++i) {
                Symbol s = static_cast<Symbol>(uniform_index(rng, sigma));
                if (++cnt[s] > per) ok = false;
                w.push_back(s);
            }
            if (ok) break;
        }
    }
    std::vector<std::size_t> cnt(sigma, 0);
    for (Symbol s : w) ++cnt[s];
    for (std::size_t i = 0; i < r; ++i) {
        Symbol s = static_cast<Symbol>(uniform_index(rng, sigma));
        w.push_back(s);
        ++cnt[s];
    }
    std::size_t changes = 0;
    for (std::size_t i = prefix; i < k; ++i) {
        Symbol s = w[i];
        if (cnt[s] <= per) continue;
        Symbol under = 0;
        while (cnt[under] >= per) ++under;
        --cnt[s];
        ++cnt[under];
        w[i] = under;
        ++changes;
    }
    if (repaired) *repaired = changes;
    return w;
}

WordCollection sample_collection(const SamplerParams& params, std::uint64_t seed,
                                 const SampleOptions& opts) {
    params.validate();
    if (BigInt(params.N) > ipow(params.sigma, params.k))
        throw Error("N = " + std::to_string(params.N) + " exceeds |Sigma|^k = " +
                    ipow(params.sigma, params.k).str() + " (pigeonhole)");
    if (BigInt(params.N) > uniform_word_count(params.sigma, params.k))
        throw Error("N exceeds the number of exactly uniform words");
    const Thresholds th = collection_thresholds(params);
    const std::size_t r = ceil_u64(params.budget() * params.k);

    WordCollection best;
    bool have_best = false;
    for (std::uint64_t attempt = 0; attempt < opts.retry_budget; ++attempt) {
        Rng rng(seed + attempt);
        std::vector<Word> theta;
        std::set<Word> seen;
        while (theta.size() < params.N) {
            Word w = draw_uniform_word(params.sigma, params.k, r, rng);
            if (seen.insert(w).second) theta.push_back(std::move(w));
        }
        VerifyOptions vo;
        vo.mode = opts.mode;
        vo.threads = opts.threads;
        vo.sample_seed = seed + attempt;
        vo.skip_after_failure = true;
        // Stop at the first window below the property (2) threshold; the failure is certain then.
        const Rational th2 = 1 - Rational(1, params.sigma) - params.gamma * params.sigma;
        if (th2 > 0) vo.abort_below = th2;
        VerificationReport rep = verify_collection(theta, params, th.tau, th.beta, vo);
        WordCollection cand{std::move(theta), th.tau, th.beta, params, rep,
                            th.tau_source, th.beta_source, attempt + 1, seed + attempt};
        if (rep.passed()) return cand;
        // Aborted attempts are not ranked, so the first failure is the one reported.
        if (!have_best) {
            best = std::move(cand);
            have_best = true;
        }
    }
    // Full report for the best attempt.
    VerifyOptions vo;
    vo.mode = opts.mode;
    vo.threads = opts.threads;
    vo.sample_seed = best.seed;
    best.report = verify_collection(best.theta, params, best.tau, best.beta, vo);
    best.attempts = opts.retry_budget;
    throw SamplerExhausted(std::move(best));
}

BigInt uniform_word_count(std::uint32_t sigma, std::size_t k) {
    if (sigma == 0 || k % sigma != 0) return 0;
    const std::size_t per = k / sigma;
    BigInt f = 1;
    for (std::size_t i = 2; i <= k; ++i) f *= i;
    BigInt g = 1;
    for (std::size_t i = 2; i <= per; ++i) g *= i;
    return f / ipow(g, sigma);
}

std::vector<Word> sample_uniform_distinct(std::uint32_t sigma, std::size_t k, std::size_t N,
                                          std::uint64_t seed, Symbol first_symbol) {
    if (sigma == 0 || k == 0 || k % sigma != 0)
        throw Error("sample_uniform_distinct: k must be a positive multiple of sigma");
    BigInt avail = uniform_word_count(sigma, k);
    if (BigInt(N) > avail)
        throw Error("sample_uniform_distinct: N = " + std::to_string(N) + " exceeds the " +
                    avail.str() + " exactly uniform words");
    Rng rng(seed);
    Word base;
    for (std::uint32_t x = 0; x < sigma; ++x) base.insert(base.end(), k / sigma, first_symbol + x);
    std::vector<Word> out;
    std::set<Word> seen;
    // When N is close to the total, enumerate by rank instead of rejection.
    if (avail <= 4 * BigInt(N)) {
        std::vector<Word> all;
        Word w = base;
        do all.push_back(w);
        while (std::next_permutation(w.begin(), w.end()));
        shuffle(all.begin(), all.end(), rng);
        all.resize(N);
        return all;
    }
    while (out.size() < N) {
        Word w = base;
        shuffle(w.begin(), w.end(), rng);
        if (seen.insert(w).second) out.push_back(std::move(w));
    }
    return out;
}

}  // namespace slowent
