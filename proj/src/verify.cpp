#include "slowent/parallel.hpp"
#include "slowent/sampler.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <unordered_map>

namespace slowent {

namespace {

std::uint64_t ceil_u64(const Rational& r) { return to_u64(ceil_rat(r), "ceiling"); }
std::uint64_t floor_u64(const Rational& r) { return to_u64(floor_rat(r), "floor"); }

// Minimum-density search state: best = a / b with its witness.
struct DensityBest {
    bool have = false;
    std::int64_t a = 0, b = 1;
    Witness wit;

    bool less(std::int64_t a2, std::int64_t b2) const { return !have || a2 * b < a * b2; }
};

struct ShiftRange {
    std::size_t pair_max;  // t <= pair_max for w != w2 (inclusive), or none when < 0
    std::size_t self_max;  // 1 <= t <= self_max for w == w2
    bool pair_any;
};

// Scans one diagonal (w, w2, t) for intervals of length in [lo, hi] with density below best.
// Returns true if the running best was lowered.
bool scan_diagonal(const Word& a, const Word& b, std::size_t t, std::size_t lo, std::size_t hi,
                   std::size_t wi, std::size_t w2i, DensityBest& best,
                   std::vector<std::int64_t>& S, std::vector<std::int32_t>& C,
                   std::deque<std::size_t>& dq) {
    const std::size_t L = a.size() - t;
    if (L < lo) return false;
    hi = std::min(hi, L);
    const Symbol* pa = a.data() + t;
    const Symbol* pb = b.data();
    bool trigger = !best.have;
    if (!trigger) {
        // Exists i <= j - lo, i >= j - hi with S_j - S_i < 0, where S uses x*b - a.
        const std::int64_t ba = best.b, aa = best.a;
        S.resize(L + 1);
        S[0] = 0;
        for (std::size_t i = 0; i < L; ++i) S[i + 1] = S[i] + (pa[i] != pb[i] ? ba : 0) - aa;
        if (hi >= L) {
            std::int64_t mn = S[0];
            for (std::size_t j = lo; j <= L; ++j) {
                mn = std::min(mn, S[j - lo]);
                if (S[j] < mn) { trigger = true; break; }
            }
        } else {
            dq.clear();
            for (std::size_t j = lo; j <= L; ++j) {
                std::size_t in = j - lo;
                while (!dq.empty() && S[dq.back()] >= S[in]) dq.pop_back();
                dq.push_back(in);
                while (dq.front() + hi < j) dq.pop_front();
                if (S[j] < S[dq.front()]) { trigger = true; break; }
            }
        }
    }
    if (!trigger) return false;
    C.resize(L + 1);
    C[0] = 0;
    for (std::size_t i = 0; i < L; ++i) C[i + 1] = C[i] + (pa[i] != pb[i]);
    bool lowered = false;
    const std::size_t top = std::min(hi, 2 * lo - 1);
    for (std::size_t s = 0; s + lo <= L; ++s) {
        const std::size_t lmax = std::min(top, L - s);
        for (std::size_t len = lo; len <= lmax; ++len) {
            std::int64_t m = C[s + len] - C[s];
            if (best.less(m, static_cast<std::int64_t>(len))) {
                best.have = true;
                best.a = m;
                best.b = static_cast<std::int64_t>(len);
                best.wit = {wi, w2i, t, t + s, len};
                lowered = true;
            }
        }
    }
    return lowered;
}

SeparationResult separation_exhaustive(const std::vector<Word>& theta, std::size_t lo,
                                       std::size_t hi, std::size_t pair_tmax, bool pair_any,
                                       std::size_t self_tmax, const Rational& threshold,
                                       const VerifyOptions& opts) {
    const std::size_t N = theta.size();
    const unsigned T = std::max(1u, opts.threads);
    std::vector<DensityBest> part(T);
    std::vector<char> aborted(T, 0);
    std::optional<std::pair<std::int64_t, std::int64_t>> abort_q;
    if (opts.abort_below) {
        // density < num/den
        abort_q = std::make_pair(static_cast<std::int64_t>(num(*opts.abort_below)),
                                 static_cast<std::int64_t>(den(*opts.abort_below)));
    }
    run_chunks(N, T, [&](unsigned id, std::size_t b, std::size_t e) {
        DensityBest best;
        std::vector<std::int64_t> S;
        std::vector<std::int32_t> C;
        std::deque<std::size_t> dq;
        for (std::size_t w = b; w < e; ++w) {
            for (std::size_t w2 = 0; w2 < N; ++w2) {
                const bool self = w == w2;
                if (!self && !pair_any) continue;
                const std::size_t t0 = self ? 1 : 0;
                const std::size_t t1 = self ? self_tmax : pair_tmax;
                for (std::size_t t = t0; t <= t1 && t < theta[w].size(); ++t) {
                    if (scan_diagonal(theta[w], theta[w2], t, lo, hi, w, w2, best, S, C, dq) &&
                        abort_q && best.a * abort_q->second < abort_q->first * best.b) {
                        aborted[id] = 1;
                        part[id] = best;
                        return;
                    }
                }
            }
        }
        part[id] = best;
    });
    SeparationResult res;
    res.evaluated = true;
    res.threshold = threshold;
    DensityBest g;
    for (unsigned i = 0; i < T; ++i) {
        if (aborted[i]) res.aborted = true;
        const auto& p = part[i];
        if (!p.have) continue;
        if (!g.have || p.a * g.b < g.a * p.b || (p.a * g.b == g.a * p.b && p.wit < g.wit)) g = p;
    }
    if (g.have) {
        res.vacuous = false;
        res.min_distance = Rational(g.a, g.b);
        res.witness = g.wit;
    }
    return res;
}

SeparationResult separation_sampled(const std::vector<Word>& theta, std::size_t lo,
                                    std::size_t hi, std::size_t pair_tmax, bool pair_any,
                                    std::size_t self_tmax, const Rational& threshold,
                                    std::uint64_t samples, std::uint64_t seed) {
    SeparationResult res;
    res.evaluated = true;
    res.threshold = threshold;
    const std::size_t N = theta.size();
    if (N == 0) return res;
    const std::size_t k = theta[0].size();
    Rng rng(seed);
    auto pick = [&](std::size_t lo_, std::size_t hi_) {
        boost::random::uniform_int_distribution<std::size_t> d(lo_, hi_);
        return d(rng);
    };
    DensityBest best;
    std::uint64_t drawn = 0;
    for (std::uint64_t s = 0; s < samples * 4 && drawn < samples; ++s) {
        std::size_t w = pick(0, N - 1), w2 = pick(0, N - 1);
        bool self = w == w2;
        if (!self && !pair_any) continue;
        std::size_t t0 = self ? 1 : 0, t1 = self ? self_tmax : pair_tmax;
        if (t1 < t0 || t1 >= k) t1 = std::min(t1, k - 1);
        if (t1 < t0) continue;
        std::size_t t = pick(t0, t1);
        std::size_t L = k - t;
        if (L < lo) continue;
        std::size_t start = pick(0, L - lo);
        std::size_t lmax = std::min(hi, L - start);
        std::size_t len = pick(lo, lmax);
        ++drawn;
        std::int64_t m = static_cast<std::int64_t>(
            count_mismatches(theta[w], t + start, theta[w2], start, len));
        Witness wit{w, w2, t, t + start, len};
        if (best.less(m, static_cast<std::int64_t>(len)) ||
            (m * best.b == best.a * static_cast<std::int64_t>(len) && wit < best.wit)) {
            best.have = true;
            best.a = m;
            best.b = static_cast<std::int64_t>(len);
            best.wit = wit;
        }
    }
    if (best.have) {
        res.vacuous = false;
        res.min_distance = Rational(best.a, best.b);
        res.witness = best.wit;
    }
    return res;
}

struct PrefixHash {
    std::vector<std::uint64_t> h;
    static constexpr std::uint64_t kBase = 1000003ULL;
    explicit PrefixHash(const Word& w) : h(w.size() + 1, 0) {
        for (std::size_t i = 0; i < w.size(); ++i) h[i + 1] = h[i] * kBase + (w[i] + 1);
    }
    std::uint64_t get(std::size_t l, std::size_t r, const std::vector<std::uint64_t>& pw) const {
        return h[r] - h[l] * pw[r - l];
    }
};

bool equal_range(const Word& a, std::size_t ao, const Word& b, std::size_t bo, std::size_t len) {
    return std::equal(a.begin() + ao, a.begin() + ao + len, b.begin() + bo);
}

ShortResult short_substrings(const std::vector<Word>& theta, const SamplerParams& params,
                             std::uint64_t tau, std::uint64_t beta, const GrowthSequence& limit_b,
                             const Rational& radius) {
    ShortResult res;
    res.evaluated = true;
    const std::size_t N = theta.size();
    if (N < 2) return res;
    const std::size_t k = params.k;
    const std::size_t P = ceil_u64((1 - params.gamma) * k);
    const std::uint64_t t_cap = ceil_u64((1 - 2 * params.gamma) * k);  // t < (1-2g)k
    std::vector<PrefixHash> hashes;
    for (const auto& w : theta) hashes.emplace_back(w);
    std::vector<std::uint64_t> pw(k + 1, 1);
    for (std::size_t i = 1; i <= k; ++i) pw[i] = pw[i - 1] * PrefixHash::kBase;

    bool have = false;
    for (std::uint64_t L = std::max<std::uint64_t>(tau, 1); L < beta; ++L) {
        const std::size_t nb = P / L;
        if (nb == 0) break;
        // mism < radius * L  <=>  mism <= D
        const std::int64_t D = static_cast<std::int64_t>(ceil_u64(radius * L)) - 1;
        if (D < 0) continue;
        const std::size_t parts = std::min<std::size_t>(static_cast<std::size_t>(D) + 1, L);
        std::vector<std::size_t> pb(parts + 1);
        for (std::size_t p = 0; p <= parts; ++p) pb[p] = p * L / parts;
        std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> index(parts);
        for (std::size_t v = 0; v < N; ++v)
            for (std::size_t j = 0; j < nb; ++j)
                for (std::size_t p = 0; p < parts; ++p)
                    index[p][hashes[v].get(j * L + pb[p], j * L + pb[p + 1], pw)].push_back(
                        static_cast<std::uint32_t>(v * nb + j));
        const double bL = limit_b.value(L);
        const std::uint64_t total = static_cast<std::uint64_t>(N - 1) * nb;
        for (std::size_t w = 0; w < N; ++w) {
            for (std::uint64_t t = 0; t < t_cap && t + L <= k; ++t) {
                std::uint64_t close = 0;
                for (std::size_t p = 0; p < parts; ++p) {
                    auto it = index[p].find(hashes[w].get(t + pb[p], t + pb[p + 1], pw));
                    if (it == index[p].end()) continue;
                    for (std::uint32_t id : it->second) {
                        const std::size_t v = id / nb, j = id % nb;
                        if (v == w) continue;
                        const std::size_t off = j * L;
                        if (!equal_range(theta[w], t + pb[p], theta[v], off + pb[p], pb[p + 1] - pb[p]))
                            continue;
                        bool earlier = false;
                        for (std::size_t q = 0; q < p && !earlier; ++q)
                            earlier = equal_range(theta[w], t + pb[q], theta[v], off + pb[q],
                                                  pb[q + 1] - pb[q]);
                        if (earlier) continue;
                        if (count_mismatches(theta[w], t, theta[v], off, L) <=
                            static_cast<std::size_t>(D))
                            ++close;
                    }
                }
                const double scaled = static_cast<double>(close) * bL / (2.0 * static_cast<double>(total));
                Witness wit{w, 0, t, t, L};
                if (!have || scaled > res.worst_scaled ||
                    (scaled == res.worst_scaled && wit < res.witness)) {
                    have = true;
                    res.worst_scaled = scaled;
                    res.worst_proportion = Rational(BigInt(close), BigInt(total));
                    res.close = close;
                    res.total = total;
                    res.witness = wit;
                }
            }
        }
    }
    res.vacuous = !have;
    return res;
}

}  // namespace

VerificationReport verify_collection(const std::vector<Word>& theta, const SamplerParams& params,
                                     std::uint64_t tau, std::uint64_t beta,
                                     const VerifyOptions& opts) {
    const std::size_t k = params.k;
    const std::uint32_t s = params.sigma;
    for (const auto& w : theta) {
        if (w.size() != k) throw Error("verify_collection: word length differs from k");
        for (Symbol x : w)
            if (x >= s) throw Error("verify_collection: symbol outside alphabet");
    }
    VerificationReport rep;
    rep.uniformity_ok = k % s == 0;
    for (std::size_t i = 0; i < theta.size() && rep.uniformity_ok; ++i) {
        std::vector<std::size_t> cnt(s, 0);
        for (Symbol x : theta[i]) ++cnt[x];
        for (std::size_t c : cnt)
            if (c * s != k) {
                rep.uniformity_ok = false;
                rep.uniformity_witness = i;
                break;
            }
    }
    rep.distinct_ok = std::set<Word>(theta.begin(), theta.end()).size() == theta.size();

    const std::size_t N = theta.size();
    bool exhaustive = opts.mode == VerifyOptions::Mode::exhaustive;
    if (opts.mode == VerifyOptions::Mode::automatic) {
        // Our exact search costs O(N^2 k^2) steps.
        long double work = static_cast<long double>(N) * N * k * k;
        exhaustive = work <= 1e11L;
    }
    rep.mode = exhaustive ? "exhaustive" : "sampled";
    if (!exhaustive) {
        rep.samples = opts.samples;
        rep.sample_seed = opts.sample_seed;
    }

    const std::size_t m = ceil_u64(params.gamma * k);
    const Rational th2 = 1 - Rational(1, s) - params.gamma * s;
    const std::size_t p2_pair_cap = ceil_u64((1 - params.gamma) * k);  // t < (1-g)k
    const std::size_t p2_self = floor_u64((1 - params.gamma) * k);
    auto run_sep = [&](std::size_t lo, std::size_t hi, std::size_t pair_cap, std::size_t self_max,
                       const Rational& thr, const VerifyOptions& o) {
        const bool pair_any = pair_cap > 0;
        const std::size_t pair_max = pair_any ? pair_cap - 1 : 0;
        if (lo == 0 || lo > hi) {
            SeparationResult r;
            r.evaluated = true;
            r.threshold = thr;
            return r;
        }
        return exhaustive ? separation_exhaustive(theta, lo, hi, pair_max, pair_any, self_max, thr, o)
                          : separation_sampled(theta, lo, hi, pair_max, pair_any, self_max, thr,
                                               o.samples, o.sample_seed);
    };

    bool failed = !rep.uniformity_ok || !rep.distinct_ok;
    rep.substantial = run_sep(m, k, p2_pair_cap, p2_self, th2, opts);
    failed = failed || !rep.substantial.ok();
    if (failed && opts.skip_after_failure) return rep;

    VerifyOptions o3 = opts;
    o3.abort_below.reset();
    const std::size_t p3_pair_cap = ceil_u64((1 - 2 * params.gamma) * k);
    const std::size_t p3_self = floor_u64((1 - 2 * params.gamma) * k);
    const std::size_t hi3 = m - 1;  // L < gamma k
    rep.intermediate = run_sep(std::max<std::size_t>(beta, 1), hi3, p3_pair_cap, p3_self, params.eps, o3);
    failed = failed || !rep.intermediate.ok();
    if (failed && opts.skip_after_failure) return rep;

    const GrowthSequence& lb = opts.c_override ? *opts.c_override : params.b;
    rep.short_eps = short_substrings(theta, params, tau, beta, lb, params.eps);
    rep.short_2eps = short_substrings(theta, params, tau, beta, lb, 2 * params.eps);
    return rep;
}

Rational replay_separation(const std::vector<Word>& theta, const Witness& w) {
    const Word& a = theta.at(w.w);
    const Word& b = theta.at(w.w2);
    if (w.start < w.t || w.start + w.length > a.size() || w.length == 0)
        throw Error("replay_separation: witness outside the overlap");
    std::size_t m = count_mismatches(a, w.start, b, w.start - w.t, w.length);
    return Rational(BigInt(m), BigInt(w.length));
}

Rational replay_short(const std::vector<Word>& theta, const SamplerParams& params,
                      const Witness& w, const Rational& radius) {
    const std::size_t k = params.k, L = w.length;
    const std::size_t P = ceil_u64((1 - params.gamma) * k);
    const std::size_t nb = P / L;
    std::uint64_t close = 0, total = 0;
    for (std::size_t v = 0; v < theta.size(); ++v) {
        if (v == w.w) continue;
        for (std::size_t j = 0; j < nb; ++j, ++total)
            if (strictly_close(count_mismatches(theta[w.w], w.t, theta[v], j * L, L), L, radius))
                ++close;
    }
    if (total == 0) throw Error("replay_short: no blocks");
    return Rational(BigInt(close), BigInt(total));
}

}  // namespace slowent
