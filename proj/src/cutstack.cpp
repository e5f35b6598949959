#include "slowent/cutstack.hpp"
#include "slowent/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace slowent {

namespace {

Rational mass_of(const Tower& t) { return t.width * Rational(t.height); }

BigInt isqrt(const BigInt& v) { return v <= 0 ? BigInt(0) : BigInt(boost::multiprecision::sqrt(v)); }

// Enough exactly uniform words of length k over C symbols for N picks.
bool enough_uniform(std::uint64_t C, std::uint64_t k, std::uint64_t N) {
    if (k % C != 0) return false;
    if (C == 1) return N <= 1;
    if (k <= 2048) return uniform_word_count(static_cast<std::uint32_t>(C), k) >= N;
    return true;  // at least binom(2048, 1024) words
}

// Smallest k >= start with f(k) > 0 and f'(k) > 0, f(k) = k a - t ln((k + 1) H). f is convex,
// so the predicate is monotone and stays true afterwards.
std::pair<std::uint64_t, bool> tau_for(std::uint64_t start, std::uint64_t C, double eps, double t, const BigInt& H) {
    const double a = std::log(static_cast<double>(C)) - q_exponent_sigma(static_cast<double>(C), eps);
    if (C < 2 || !(a > 0)) return {start, false};
    const double lh = log_big(H);
    auto good = [&](std::uint64_t k) {
        const double kk = static_cast<double>(k);
        return kk * a - t * (std::log(kk + 1) + lh) > 0 && a - t / (kk + 1) > 0;
    };
    if (good(start)) return {start, true};
    std::uint64_t lo = start, hi = std::max<std::uint64_t>(start, 1);
    while (!good(hi)) {
        lo = hi;
        if (hi > (1ULL << 61)) return {start, false};
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        (good(mid) ? hi : lo) = mid;
    }
    return {hi, true};
}

std::string words_block(const std::vector<Word>& ws, std::uint32_t sigma) {
    std::ostringstream os;
    write_words(os, ws, sigma);
    return os.str();
}

std::vector<Word> words_from_block(const std::string& s) {
    if (s.empty()) return {};
    std::istringstream is(s);
    return read_words(is).words;
}

nlohmann::json rat(const Rational& r) { return to_string(r); }
nlohmann::json big(const BigInt& v) { return to_string(v); }

nlohmann::json rats(const std::vector<Rational>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : v) a.push_back(to_string(r));
    return a;
}

std::vector<Rational> rats_from(const nlohmann::json& a) {
    std::vector<Rational> v;
    for (const auto& x : a) v.push_back(parse_rational(x.get<std::string>()));
    return v;
}

StageRecord record_of(const RankTwoSystem& s) {
    StageRecord r;
    r.n = s.n;
    r.h1 = s.tower1.height;
    r.h2 = s.tower2.height;
    r.w1 = s.tower1.width;
    r.w2 = s.tower2.width;
    r.H_prev = s.H_prev;
    r.H = s.H;
    r.C = s.profile.C(s.n);
    r.tau = s.tau;
    r.tau_certified = s.tau_certified;
    return r;
}

}  // namespace

// ---------------------------------------------------------------- profile

Profile Profile::paper_profile() {
    Profile p;
    p.name = "paper";
    p.paper = true;
    p.h1 = ipow(2, 21);
    p.h2 = ipow(2, 70);
    p.w1 = Rational(1, ipow(2, 21));
    p.w2 = Rational(1, ipow(2, 70));
    p.cut_counts.clear();
    p.eps = Rational(1, 1000);
    p.allow_widening = false;
    p.R_keep_window = false;
    p.relaxed.clear();
    return p;
}

Profile Profile::desk(std::uint64_t C) {
    Profile p;
    p.name = "desk-C" + std::to_string(C);
    p.cut_counts = {C};
    p.h1 = 1;
    p.w1 = 1;
    p.h2 = stage_H(1, 1, C);
    // w2 puts the stage-1 split ratio at g = 1 inside the default window
    const StepWeights sw = step_weights(1, 1, C);
    Rational denom = 1;
    for (std::uint64_t j = C; j < 2 * C; ++j) denom += Rational(BigInt(j)) * sw.beta[j - C];
    p.w2 = Rational(7, 600) * denom / Rational(p.h2 * BigInt(C) * BigInt(C));
    p.relaxed = {"cut_count", "height_ratio_floor", "g_floor", "R_constraints", "initial_heights"};
    return p;
}

std::uint64_t Profile::C(std::uint64_t n) const {
    if (paper) return to_u64(ipow(n + 1, 6), "cut count");
    if (cut_counts.empty()) throw Error("profile has no cut counts");
    return n - 1 < cut_counts.size() ? cut_counts[n - 1] : cut_counts.back();
}

Rational Profile::t(std::uint64_t n) const {
    if (t_seq.empty()) throw Error("profile has no t sequence");
    return n - 1 < t_seq.size() ? t_seq[n - 1] : t_seq.back();
}

Rational Profile::ratio_floor(std::uint64_t n) const {
    if (paper) return Rational(ipow(n + 1, 21));
    return height_ratio_floor;
}

void Profile::validate() const {
    if (!paper) {
        if (cut_counts.empty()) throw Error("profile: cut_counts must be non-empty");
        for (auto c : cut_counts)
            if (c == 0) throw Error("profile: cut counts must be positive");
        if (relaxed.empty()) throw Error("profile: desk profiles must declare the inequalities they relax");
    }
    if (h1 < 1 || h2 < 1) throw Error("profile: heights must be positive");
    if (w1 <= 0 || w2 <= 0) throw Error("profile: widths must be positive");
    if (H_prev < 1) throw Error("profile: H_0 must be positive");
    if (paper && H_prev != 1) throw Error("profile: H_0 = 1 under the paper profile");
    if (height_ratio_floor <= 0) throw Error("profile: height_ratio_floor must be positive");
    if (g_floor == 0) throw Error("profile: g_floor must be positive");
    if (!(window_lo > 0 && window_lo < window_hi && window_hi < 1)) throw Error("profile: need 0 < window_lo < window_hi < 1");
    if (R_floor == 0 || N_cap == 0) throw Error("profile: R_floor and N_cap must be positive");
    if (!(eps > 0 && eps < Rational(1, 4))) throw Error("profile: eps must lie in (0, 1/4)");
    if (t_seq.empty()) throw Error("profile: t_seq must be non-empty");
    for (const auto& t : t_seq)
        if (t <= 0) throw Error("profile: t values must be positive");
    if (materialize_cap == 0 || e_period_min == 0 || n0 == 0) throw Error("profile: caps must be positive");
}

nlohmann::json profile_to_json(const Profile& p) {
    nlohmann::json j;
    j["name"] = p.name;
    j["paper"] = p.paper;
    j["cut_counts"] = p.cut_counts;
    j["h1"] = big(p.h1);
    j["h2"] = big(p.h2);
    j["w1"] = rat(p.w1);
    j["w2"] = rat(p.w2);
    j["H0"] = big(p.H_prev);
    j["height_ratio_floor"] = rat(p.height_ratio_floor);
    j["g_floor"] = p.g_floor;
    j["window"] = {rat(p.window_lo), rat(p.window_hi)};
    j["allow_widening"] = p.allow_widening;
    j["R_floor"] = p.R_floor;
    j["R_keep_window"] = p.R_keep_window;
    j["N_cap"] = p.N_cap;
    j["eps"] = rat(p.eps);
    j["t_seq"] = rats(p.t_seq);
    j["materialize_cap"] = p.materialize_cap;
    j["e_period_min"] = p.e_period_min;
    j["n0"] = p.n0;
    j["relaxed"] = p.relaxed;
    return j;
}

Profile profile_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{"name", "paper", "cut_counts", "h1", "h2", "w1", "w2", "H0",
                                             "height_ratio_floor", "g_floor", "window", "allow_widening",
                                             "R_floor", "R_keep_window", "N_cap", "eps", "t_seq", "materialize_cap",
                                             "e_period_min", "n0", "relaxed"};
    if (!j.is_object()) throw Error("profile must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw Error("unknown profile key: " + it.key());
    Profile p = j.value("paper", false) ? Profile::paper_profile() : Profile::desk(1);
    if (j.contains("name")) p.name = j["name"].get<std::string>();
    if (j.contains("cut_counts")) p.cut_counts = j["cut_counts"].get<std::vector<std::uint64_t>>();
    if (j.contains("h1")) p.h1 = parse_bigint(j["h1"].get<std::string>());
    if (j.contains("h2")) p.h2 = parse_bigint(j["h2"].get<std::string>());
    if (j.contains("w1")) p.w1 = parse_rational(j["w1"].get<std::string>());
    if (j.contains("w2")) p.w2 = parse_rational(j["w2"].get<std::string>());
    if (j.contains("H0")) p.H_prev = parse_bigint(j["H0"].get<std::string>());
    if (j.contains("height_ratio_floor"))
        p.height_ratio_floor = parse_rational(j["height_ratio_floor"].get<std::string>());
    if (j.contains("g_floor")) p.g_floor = j["g_floor"].get<std::uint64_t>();
    if (j.contains("window")) {
        const auto& w = j["window"];
        if (!w.is_array() || w.size() != 2) throw Error("profile window must be [lo, hi]");
        p.window_lo = parse_rational(w[0].get<std::string>());
        p.window_hi = parse_rational(w[1].get<std::string>());
    }
    if (j.contains("allow_widening")) p.allow_widening = j["allow_widening"].get<bool>();
    if (j.contains("R_floor")) p.R_floor = j["R_floor"].get<std::uint64_t>();
    if (j.contains("R_keep_window")) p.R_keep_window = j["R_keep_window"].get<bool>();
    if (j.contains("N_cap")) p.N_cap = j["N_cap"].get<std::uint64_t>();
    if (j.contains("eps")) p.eps = parse_rational(j["eps"].get<std::string>());
    if (j.contains("t_seq")) p.t_seq = rats_from(j["t_seq"]);
    if (j.contains("materialize_cap")) p.materialize_cap = j["materialize_cap"].get<std::uint64_t>();
    if (j.contains("e_period_min")) p.e_period_min = j["e_period_min"].get<std::uint64_t>();
    if (j.contains("n0")) p.n0 = j["n0"].get<std::uint64_t>();
    if (j.contains("relaxed")) p.relaxed = j["relaxed"].get<std::vector<std::string>>();
    p.validate();
    return p;
}

// ---------------------------------------------------------------- system

Rational RankTwoSystem::mass() const { return mass_of(tower1) + mass_of(tower2); }

BigInt stage_H(const BigInt& h1, const BigInt& H_prev, std::uint64_t C) {
    BigInt H = 1;
    for (std::uint64_t i = 0; i < 2 * C; ++i) H *= h1 + BigInt(i) * H_prev;
    return H;
}

RankTwoSystem init_system(const Profile& profile) {
    profile.validate();
    if (profile.h1 % profile.H_prev != 0)
        throw Error("init_system: h1 = " + to_string(profile.h1) + " is not divisible by H_prev = " +
                    to_string(profile.H_prev));
    RankTwoSystem s;
    s.profile = profile;
    s.n = 1;
    s.tower1 = {profile.w1, profile.h1};
    s.tower2 = {profile.w2, profile.h2};
    s.H_prev = profile.H_prev;
    const std::uint64_t C = profile.C(1);
    s.H = stage_H(profile.h1, profile.H_prev, C);
    auto [tau, cert] = tau_for(1, C, to_double(profile.eps), to_double(profile.t(1)), s.H);
    s.tau = tau;
    s.tau_certified = cert;
    s.initial_mass = s.mass();
    s.history.push_back(record_of(s));
    return s;
}

StepWeights step_weights(const BigInt& h1, const BigInt& H_prev, std::uint64_t C) {
    if (h1 < 1 || H_prev < 1 || C == 0) throw Error("step_weights: h1, H_prev and C must be positive");
    StepWeights w;
    auto block = [&](std::uint64_t from, std::vector<Rational>& out) {
        Rational sum = 0;
        for (std::uint64_t k = from; k < from + C; ++k) {
            out.emplace_back(BigInt(1), h1 + BigInt(k) * H_prev);
            sum += out.back();
        }
        for (auto& x : out) x /= sum;
    };
    block(0, w.alpha);
    block(C, w.beta);
    return w;
}

std::pair<RankTwoSystem, StageTrace> advance_stage(const RankTwoSystem& sys, std::uint64_t seed) {
    const Profile& P = sys.profile;
    if (P.paper)
        throw Error("advance_stage: the paper profile only supports stage 1 (its constants are far beyond reach)");
    if (!sys.h1_divisible()) throw Error("advance_stage: H_prev does not divide h1");
    if (!sys.h2_divisible())
        throw Error("advance_stage: H = " + to_string(sys.H) + " does not divide h2 = " + to_string(sys.tower2.height));

    const std::uint64_t n = sys.n, C = P.C(n), C_next = P.C(n + 1);
    const BigInt& h1 = sys.tower1.height;
    const BigInt& h2 = sys.tower2.height;
    const BigInt& Hp = sys.H_prev;
    const BigInt& H = sys.H;
    const Rational& w1 = sys.tower1.width;
    const Rational& w2 = sys.tower2.width;

    StageTrace tr;
    tr.n = n;
    tr.relaxed = P.relaxed;
    const StepWeights sw = step_weights(h1, Hp, C);
    tr.alpha = sw.alpha;
    tr.beta = sw.beta;

    // Step (ii): split the base of tower 1.
    Rational denom = Rational(h1);
    for (std::uint64_t j = C; j < 2 * C; ++j) denom += Rational(BigInt(j) * Hp) * sw.beta[j - C];
    const Rational K = Rational(H * BigInt(C) * BigInt(C)) * w2 / (denom * w1);  // ratio(g) = g^2 K
    auto ratio = [&](std::uint64_t g) { return K * Rational(BigInt(g) * BigInt(g)); };
    // A-words hold (gC)^2 symbols in total
    const std::uint64_t g_max = C == 1 ? 1 : std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::sqrt(static_cast<double>(P.materialize_cap))) / C);
    auto admissible = [&](std::uint64_t g) { return g <= g_max && (C == 1 || enough_uniform(C, g * C, g * C)); };
    std::uint64_t g = 0;
    BigInt cand;  // smallest g >= g_floor with g^2 K > lo
    {
        cand = isqrt(floor_rat(P.window_lo / K));
        while (cand > 1 && Rational((cand - 1) * (cand - 1)) * K > P.window_lo) --cand;
        while (Rational(cand * cand) * K <= P.window_lo) ++cand;
        cand = std::max(cand, BigInt(P.g_floor));
        for (std::uint64_t c = std::min(cand, BigInt(g_max + 1)).convert_to<std::uint64_t>(); c <= g_max && ratio(c) < P.window_hi; ++c)
            if (c >= cand && admissible(c)) {
                g = c;
                break;
            }
    }
    tr.window_lo = P.window_lo;
    tr.window_hi = P.window_hi;
    if (g == 0) {
        if (!P.allow_widening)
            throw Error("advance_stage: no admissible g in the ratio window (" + to_string(P.window_lo) + ", " +
                        to_string(P.window_hi) + ")");
        // closest admissible g below the window, never under g_floor
        std::uint64_t gw = std::min(BigInt(g_max), cand).convert_to<std::uint64_t>();
        while (gw > P.g_floor && (!admissible(gw) || !(ratio(gw) < P.window_hi))) --gw;
        if (C == 1) gw = 1;
        if (!(ratio(gw) < 1) || !admissible(gw))
            throw Error("advance_stage: widening failed, split ratio at g = " + std::to_string(gw) + " is " +
                        to_string(ratio(gw)));
        g = gw;
        tr.window_widened = true;
        tr.window_lo = std::min(P.window_lo, ratio(g));
        tr.window_hi = std::max(P.window_hi, ratio(g));
    }
    tr.g = g;
    tr.split_ratio = ratio(g);
    const Rational B12 = tr.split_ratio * w1;
    const Rational B11 = w1 - B12;

    // Step (iii): staircase spacers.
    tr.W_widths.resize(2 * C);
    Rational spacer = 0;
    for (std::uint64_t k = 0; k < 2 * C; ++k) {
        tr.W_widths[k] = k < C ? sw.alpha[k] * B11 : sw.beta[k - C] * B12;
        spacer += Rational(BigInt(k) * Hp) * tr.W_widths[k];
    }
    tr.spacer_mass = spacer;

    // Step (iv): restack each W^{(k)} into a tower of height H.
    tr.D_widths.resize(2 * C);
    for (std::uint64_t k = 0; k < 2 * C; ++k)
        tr.D_widths[k] = tr.W_widths[k] * Rational(h1 + BigInt(k) * Hp) / Rational(H);
    const Rational d_hi = Rational(BigInt(g) * BigInt(g) * BigInt(C)) * w2;
    for (std::uint64_t k = 0; k < 2 * C; ++k)
        if (tr.D_widths[k] != (k < C ? tr.D_widths[0] : d_hi))
            throw Error("advance_stage: internal width mismatch at D^(" + std::to_string(k) + ")");

    // Step (v): A-towers over the upper block.
    const std::uint64_t gC = g * C;
    std::vector<Word> a_words = sample_uniform_distinct(static_cast<std::uint32_t>(C), gC, gC, seed,
                                                        static_cast<Symbol>(C));
    const BigInt h1n = BigInt(gC) * BigInt(gC) * H + h2;
    const Rational w1n = w2;
    const BigInt Hn = stage_H(h1n, H, C_next);
    auto [tau_n, tau_cert] = tau_for(n + 1, C_next, to_double(P.eps), to_double(P.t(n + 1)), Hn);

    // Step (vi): choose R and the E-words.
    const double tn = to_double(P.t(n));
    const BigInt base = lcm(BigInt(C), BigInt(C_next)) * Hn;
    BigInt need = ceil_div(BigInt(tau_n) * Hn, H);
    need = std::max({need, BigInt(sys.tau + 1), BigInt(P.R_floor), BigInt(1)});
    BigInt R = ceil_div(need, base) * base;
    const double target = 8 * std::log(static_cast<double>(n + 1));
    while (tn * log_big((R + 1) * H) <= target) R += base;

    auto choose_N = [&](const BigInt& Rc, std::string& src) -> std::uint64_t {
        if (C == 1) {
            src = "uniform_count";
            return 1;
        }
        std::uint64_t N = P.N_cap;
        src = "cap";
        const double lb = tn * log_big((Rc + 1) * H);
        if (lb < std::log(static_cast<double>(P.N_cap)) + 1) {
            const Rational t = P.t(n);
            const BigInt bR = floor_mul_root(1, ipow((Rc + 1) * H, to_u64(num(t), "t")),
                                             static_cast<unsigned>(to_u64(den(t), "t")));
            if (bR < N) {
                N = std::max<std::uint64_t>(1, bR.convert_to<std::uint64_t>());
                src = "b_R";
            }
        }
        if (Rc <= P.materialize_cap)
            while (N > 1 && !enough_uniform(C, Rc.convert_to<std::uint64_t>(), N)) {
                --N;
                src = "uniform_count";
            }
        return N;
    };
    std::string Nsrc;
    std::uint64_t N = choose_N(R, Nsrc);
    if (P.R_keep_window) {
        // next ratio at g = 1 is K0 / (N R)
        const StepWeights nw = step_weights(h1n, H, C_next);
        Rational dn = Rational(h1n);
        for (std::uint64_t j = C_next; j < 2 * C_next; ++j) dn += Rational(BigInt(j) * H) * nw.beta[j - C_next];
        const Rational K0 = Rational(Hn * BigInt(C_next) * BigInt(C_next) * BigInt(C)) * tr.D_widths[0] / (dn * w1n);
        while (K0 / Rational(BigInt(N) * R) >= P.window_hi) {
            const BigInt want = floor_rat(K0 / (P.window_hi * Rational(BigInt(N)))) + 1;
            R = std::max(BigInt(R + base), BigInt(ceil_div(want, base) * base));
            N = choose_N(R, Nsrc);
        }
    }

    std::vector<Word> e_base;
    BigInt e_rep = 1;
    const std::uint64_t seed_e = seed ^ 0x9E3779B97F4A7C15ULL;
    if (C > 1) {
        if (R <= P.materialize_cap) {
            e_base = sample_uniform_distinct(static_cast<std::uint32_t>(C), R.convert_to<std::uint64_t>(), N, seed_e);
            tr.e_words = "full";
        } else {
            std::uint64_t m = 0;
            const std::uint64_t start = std::max<std::uint64_t>(P.e_period_min, C);
            for (std::uint64_t c = ((start + C - 1) / C) * C; c <= P.materialize_cap; c += C)
                if (R % c == 0 && enough_uniform(C, c, N)) {
                    m = c;
                    break;
                }
            if (m == 0) throw Error("advance_stage: no admissible E-word period divides R = " + to_string(R));
            e_base = sample_uniform_distinct(static_cast<std::uint32_t>(C), m, N, seed_e);
            e_rep = R / m;
            tr.e_words = "periodic(" + std::to_string(m) + ")";
        }
    } else {
        // one symbol: the single E-word is constant; store one period
        e_base = {Word(1, 0)};
        e_rep = R;
        tr.e_words = R <= P.materialize_cap ? "full" : "periodic(1)";
    }

    // Step (vii): stack the E-towers into the new tower 2.
    const BigInt h2n = BigInt(N) * R * H;
    const Rational w2n = tr.D_widths[0] * Rational(BigInt(C)) / Rational(BigInt(N) * R);

    RankTwoSystem next = sys;
    next.history.back().advanced = true;
    next.history.back().g = g;
    next.history.back().a_words = a_words;
    next.history.back().e_base = e_base;
    next.history.back().e_repeats = e_rep;
    next.history.back().R = R;
    next.history.back().N = N;
    next.n = n + 1;
    next.tower1 = {w1n, h1n};
    next.tower2 = {w2n, h2n};
    next.H_prev = H;
    next.H = Hn;
    next.tau = tau_n;
    next.tau_certified = tau_cert;
    next.spacer_mass_ledger.push_back(spacer);
    next.history.push_back(record_of(next));

    if (next.mass() != sys.mass() + spacer) throw Error("advance_stage: mass is not conserved");
    if (h1n % H != 0 || h2n % Hn != 0) throw Error("advance_stage: divisibility chain broken");

    tr.h1_next = h1n;
    tr.h2_next = h2n;
    tr.H_next = Hn;
    tr.R = R;
    tr.N = N;
    tr.N_source = Nsrc;
    tr.tau_next = tau_n;
    tr.tau_next_certified = tau_cert;
    tr.w1_next = w1n;
    tr.w2_next = w2n;
    next.traces.push_back(tr);
    return {next, tr};
}

// ---------------------------------------------------------------- codings

StageWords coding_words(const RankTwoSystem& sys, std::uint64_t m) {
    if (m < 1 || m > sys.n || m > sys.history.size())
        throw Error("coding_words: reference stage " + std::to_string(m) + " is not tracked (current stage " +
                    std::to_string(sys.n) + ")");
    const StageRecord& ref = sys.history[m - 1];
    Rope v1 = Rope::labels(1, ref.h1);
    Rope v2 = Rope::labels(ref.h1 + 1, ref.h2);

    auto w_list = [](const Rope& v1r, const StageRecord& r, std::vector<Rope>* zs) {
        std::vector<Rope> ws;
        for (std::uint64_t k = 0; k < 2 * r.C; ++k) {
            const BigInt gap = BigInt(k) * r.H_prev;
            Rope z = Rope::concat({v1r, Rope::spacer(gap)});
            ws.push_back(Rope::repeat(z, r.H / (r.h1 + gap)));
            if (zs) zs->push_back(z);
        }
        return ws;
    };

    for (std::uint64_t s = m; s < sys.n; ++s) {
        const StageRecord& r = sys.history[s - 1];
        if (!r.advanced) throw Error("coding_words: stage " + std::to_string(s) + " has no recorded cut data");
        const std::vector<Rope> ws = w_list(v1, r, nullptr);
        std::vector<Rope> top{v2};
        for (const Word& a : r.a_words)
            for (Symbol x : a) top.push_back(ws.at(x));
        std::vector<Rope> es;
        for (const Word& e : r.e_base) {
            std::vector<Rope> parts;
            parts.reserve(e.size());
            for (Symbol x : e) parts.push_back(ws.at(x));
            es.push_back(Rope::repeat(Rope::concat(parts), r.e_repeats));
        }
        v1 = Rope::concat(top);
        v2 = Rope::concat(es);
    }
    StageWords out;
    out.stage = sys.n;
    out.reference = m;
    out.v1 = v1;
    out.v2 = v2;
    const StageRecord& cur = sys.history[sys.n - 1];
    out.h1 = cur.h1;
    out.H_prev = cur.H_prev;
    out.H = cur.H;
    out.C = cur.C;
    out.w = w_list(v1, cur, &out.z);
    return out;
}

CodedDistribution coded_distribution(const RankTwoSystem& sys, std::uint64_t partition_stage, std::size_t n) {
    const std::uint64_t cap = sys.profile.materialize_cap;
    if (sys.tower1.height + sys.tower2.height > cap)
        throw Error("coded_distribution: tower heights exceed materialize_cap = " + std::to_string(cap));
    const StageWords sw = coding_words(sys, partition_stage);
    return tower_distribution({{sw.v1.materialize(cap), sys.tower1.width}, {sw.v2.materialize(cap), sys.tower2.width}}, n);
}

Rational w_distance(const StageWords& sw, std::uint64_t i, std::uint64_t j, std::uint64_t cap) {
    if (i == j) throw Error("w_distance: indices must differ (i != j)");
    if (i >= sw.z.size() || j >= sw.z.size()) throw Error("w_distance: index out of range");
    const Word zi = sw.z[i].materialize(cap);
    const Word zj = sw.z[j].materialize(cap);
    const std::uint64_t Pi = zi.size(), Pj = zj.size();
    const std::uint64_t g = std::gcd(Pi, Pj);
    // Over one lcm period every residue pair (a mod Pi, b mod Pj) with a = b mod g occurs once.
    std::unordered_map<std::uint64_t, std::uint64_t> cnt;
    for (std::uint64_t a = 0; a < Pi; ++a) ++cnt[((a % g) << 32) | zi[a]];
    BigInt matches = 0;
    for (std::uint64_t b = 0; b < Pj; ++b) {
        auto it = cnt.find(((b % g) << 32) | zj[b]);
        if (it != cnt.end()) matches += it->second;
    }
    const BigInt L = BigInt(Pi) / g * BigInt(Pj);
    return Rational(1) - Rational(matches, L);
}

bool realigned(const StageWords& sw, std::uint64_t i, std::uint64_t j, const BigInt& m) {
    const BigInt Pi = sw.h1 + BigInt(i) * sw.H_prev;
    const BigInt Pj = sw.h1 + BigInt(j) * sw.H_prev;
    const BigInt x = m * sw.H_prev;
    return x % Pi == 0 && x % Pj == 0;
}

std::optional<std::uint64_t> effective_index(const BigInt& h1, const BigInt& H_prev, std::uint64_t C) {
    const Rational x = Rational(BigInt(4 * C) * H_prev) / Rational(h1);
    const Rational y = Rational(h1 - BigInt(2 * C) * H_prev) / Rational(h1 + BigInt(2 * C) * H_prev);
    std::optional<std::uint64_t> best;
    for (std::uint64_t n = 2; n < 1'000'000; ++n) {
        const Rational six(6, BigInt(n) * BigInt(n));
        if (six < x) break;
        const Rational lhs = Rational(BigInt(1), ipow(BigInt(n - 1), 6)) + x;
        if (lhs <= six && y >= 1 - six) best = n;
    }
    return best;
}

LemmaReport check_alignment_lemmas(const StageWords& words, const RankTwoSystem& sys, const LemmaOptions& opts) {
    LemmaReport rep;
    const std::uint64_t cap = sys.profile.materialize_cap;
    const BigInt& h1 = words.h1;
    const BigInt& Hp = words.H_prev;
    const BigInt h2 = words.v2.length();

    rep.n_eff = opts.n_eff_override ? opts.n_eff_override : effective_index(h1, Hp, words.C);
    const std::uint64_t n = rep.n_eff.value_or(std::max<std::uint64_t>(2, words.stage + 1));
    if (!rep.n_eff) rep.notes.push_back("no effective index satisfies the hypotheses; using n = " + std::to_string(n));
    const bool ratio_ok = Rational(h1) / Rational(Hp) >= sys.profile.ratio_floor(words.stage);
    if (!ratio_ok) rep.notes.push_back("h1 / H_prev is below the profile height-ratio floor");

    std::optional<Word> v1;
    if (h1 <= cap) v1 = words.v1.materialize(cap);
    else rep.notes.push_back("v1 longer than materialize_cap; alpha not measured");

    auto shift_dist = [&](const Word& w, std::uint64_t t) { return overlap_distance(w, w, t).distance; };

    // alpha over 1 <= t <= (1 - 1/(n-1)^6) h1 / H_prev
    if (v1) {
        const Rational frac = Rational(1) - Rational(BigInt(1), ipow(BigInt(n - 1), 6));
        const BigInt Tb = floor_rat(frac * Rational(h1) / Rational(Hp));
        rep.t_max = Tb.convert_to<std::uint64_t>();
        const std::uint64_t hp = Hp.convert_to<std::uint64_t>();
        const std::uint64_t L1 = v1->size();
        const double work = static_cast<double>(rep.t_max) * static_cast<double>(L1);
        rep.alpha_exhaustive = work <= static_cast<double>(opts.alpha_work_cap);
        std::vector<std::uint64_t> ts;
        if (rep.alpha_exhaustive) {
            for (std::uint64_t t = 1; t <= rep.t_max; ++t) ts.push_back(t);
        } else {
            const std::uint64_t G = 4096;
            for (std::uint64_t i = 0; i < G && rep.t_max > 0; ++i) ts.push_back(1 + i * (rep.t_max - 1) / (G - 1));
            rep.notes.push_back("alpha measured on a shift grid, not exhaustively");
        }
        for (std::uint64_t t : ts) {
            if (t * hp >= L1) continue;
            const Rational d = shift_dist(*v1, t * hp);
            if (!rep.alpha || d < *rep.alpha) {
                rep.alpha = d;
                rep.alpha_t = t;
            }
        }
        // inequality (1): the wider range with (n-1)^2
        const Rational frac1 = Rational(1) - Rational(BigInt(1), BigInt(n - 1) * BigInt(n - 1));
        const std::uint64_t T1 = floor_rat(frac1 * Rational(h1) / Rational(Hp)).convert_to<std::uint64_t>();
        for (std::uint64_t i = 0; i < opts.grid && T1 >= 1; ++i) {
            const std::uint64_t t = opts.grid == 1 ? 1 : 1 + i * (T1 - 1) / (opts.grid - 1);
            if (t * hp >= L1) continue;
            const Rational d = shift_dist(*v1, t * hp);
            if (!rep.ineq1_min || d < *rep.ineq1_min) rep.ineq1_min = d;
        }
    }
    rep.certified = rep.n_eff.has_value() && ratio_ok && rep.alpha.has_value() && rep.alpha_exhaustive;

    // pairs i < j; distances are symmetric
    const Rational factor = [&] {
        const Rational f = Rational(1) - Rational(BigInt(6), BigInt(n) * BigInt(n));
        return f * f;
    }();
    bool z_ok = h1 + BigInt(2 * words.C) * Hp <= cap;
    if (!z_ok) rep.notes.push_back("z-words exceed materialize_cap; pair distances skipped");
    for (std::uint64_t i = 0; z_ok && i < 2 * words.C; ++i)
        for (std::uint64_t j = i + 1; j < 2 * words.C; ++j) {
            PairCheck pc;
            pc.i = i;
            pc.j = j;
            pc.distance = w_distance(words, i, j, cap);
            const Rational bound = rep.alpha ? factor * *rep.alpha : factor;
            pc.bound = to_double(bound);
            pc.ok = pc.distance >= bound;
            const BigInt L = lcm(h1 + BigInt(i) * Hp, h1 + BigInt(j) * Hp);
            pc.first_realignment = L / gcd(L, Hp);
            rep.all_pairs_ok = rep.all_pairs_ok && pc.ok;
            rep.pairs.push_back(pc);
        }

    // inequality (2): v2 self-shifts; inequality (3): v1 against v2 shifted by t H_prev
    const std::uint64_t G = std::max<std::uint64_t>(opts.grid, 1);
    {
        const BigInt T2 = floor_rat((Rational(1) - Rational(BigInt(1), BigInt(n) * BigInt(n))) * Rational(h2) / Rational(Hp));
        for (std::uint64_t i = 0; i < G && T2 >= 1; ++i) {
            const BigInt t = G == 1 ? BigInt(1) : 1 + BigInt(i) * (T2 - 1) / (G - 1);
            const BigInt len = h2 - t * Hp;
            if (len <= 0 || len > cap) continue;
            Word a, b;
            const std::uint64_t l = len.convert_to<std::uint64_t>();
            words.v2.extract(t * Hp, l, a);
            words.v2.extract(0, l, b);
            const Rational d(BigInt(count_mismatches(a, 0, b, 0, l)), BigInt(l));
            if (!rep.ineq2_min || d < *rep.ineq2_min) rep.ineq2_min = d;
        }
        if (!rep.ineq2_min) rep.notes.push_back("inequality (2) not evaluated: overlaps exceed materialize_cap");
    }
    if (v1 && h2 >= h1) {
        const BigInt T3 = (h2 - h1) / Hp;
        const std::uint64_t l = v1->size();
        for (std::uint64_t i = 0; i < G && T3 >= 1; ++i) {
            const BigInt t = G == 1 ? BigInt(1) : 1 + BigInt(i) * (T3 - 1) / (G - 1);
            Word b;
            words.v2.extract(t * Hp, l, b);
            const Rational d(BigInt(count_mismatches(*v1, 0, b, 0, l)), BigInt(l));
            if (!rep.ineq3_min || d < *rep.ineq3_min) rep.ineq3_min = d;
        }
    }

    auto product = [&](double c) {
        double p = 1;
        for (std::uint64_t m = sys.profile.n0; m <= 2 * n; ++m) {
            const double md = static_cast<double>(m);
            p *= std::pow(1 - c / (md * md), 5);
        }
        return p;
    };
    rep.product_1600 = product(1600);
    rep.product_600 = product(600);
    return rep;
}

// ---------------------------------------------------------------- accounting

MassReport mass_report(const RankTwoSystem& sys) {
    MassReport r;
    r.asserted = sys.profile.paper;
    r.initial_total = sys.initial_mass;
    r.current_total = sys.mass();
    Rational total = sys.initial_mass;
    for (std::size_t i = 0; i < sys.spacer_mass_ledger.size(); ++i) {
        const StageRecord& a = sys.history.at(i);
        const StageRecord& b = sys.history.at(i + 1);
        MassEntry e;
        e.n = a.n;
        e.spacer_added = sys.spacer_mass_ledger[i];
        total += e.spacer_added;
        e.total_after = total;
        const Rational m1 = b.w1 * Rational(b.h1), m2 = b.w2 * Rational(b.h2);
        e.ratio = m1 / m2;
        e.ratio_in_bounds = e.ratio > Rational(1, 3) && e.ratio < Rational(31, 10);
        const Rational prev1 = a.w1 * Rational(a.h1);
        e.exchange_ok = Rational(98, 100) * prev1 <= m2;
        e.spacer_bound_ok = e.spacer_added < prev1 / Rational(ipow(BigInt(a.n + 1), 14));
        r.entries.push_back(e);
    }
    r.ledger_total = total - sys.initial_mass;
    r.conserved = total == r.current_total;
    r.ratio = mass_of(sys.tower1) / mass_of(sys.tower2);
    r.ratio_in_bounds = r.ratio > Rational(1, 3) && r.ratio < Rational(31, 10);
    double prod = 1;
    for (int n = 1; n <= 200; ++n) prod *= 1 + std::pow(n + 1.0, -14);
    const StageRecord& first = sys.history.front();
    r.total_bound = to_double(first.w1 * Rational(first.h1) + first.w2 * Rational(first.h2)) * prod;
    return r;
}

NoSpacerResult nospacer_baseline(std::uint64_t h1, std::uint64_t h2, const Rational& w1, const Rational& w2,
                                 const std::vector<CutColumn>& plan, const Rational& eps) {
    if (h2 == 0) throw Error("nospacer_baseline: h2 must be positive");
    if (w1 < 0 || w2 <= 0) throw Error("nospacer_baseline: widths must be non-negative (w2 positive)");
    if (h1 + h2 > 0xFFFFFFFFULL) throw Error("nospacer_baseline: labels do not fit 32-bit symbols");
    if (plan.empty()) throw Error("nospacer_baseline: empty cutting plan");
    Rational used1 = 0, used2 = 0;
    NoSpacerResult res;
    for (const auto& col : plan) {
        if (col.width <= 0) throw Error("nospacer_baseline: column widths must be positive");
        if (col.ids.empty()) throw Error("nospacer_baseline: empty column");
        TowerCoding tc;
        tc.width = col.width;
        for (int id : col.ids) {
            if (id == 1) {
                for (std::uint64_t x = 1; x <= h1; ++x) tc.coding.push_back(static_cast<Symbol>(x));
                used1 += col.width;
            } else if (id == 2) {
                for (std::uint64_t x = 1; x <= h2; ++x) tc.coding.push_back(static_cast<Symbol>(h1 + x));
                used2 += col.width;
            } else {
                throw Error("nospacer_baseline: plan adds spacers (tower id " + std::to_string(id) + ")");
            }
        }
        res.towers.push_back(std::move(tc));
    }
    if (used1 != (h1 ? w1 : Rational(0)) || used2 != w2)
        throw Error("nospacer_baseline: plan does not use each old tower's full width exactly once");

    res.L = std::max<std::uint64_t>(1, floor_rat(eps * eps * Rational(BigInt(h2))).convert_to<std::uint64_t>());
    const CodedDistribution dist = tower_distribution(res.towers, res.L);
    res.atoms = dist.atoms.size();
    const Rational r = eps * eps;
    res.cover = res.atoms <= kExactCoverCap ? exact_cover_small(dist, r, 4 * r) : greedy_cover(dist, r, 4 * r);
    res.bound = h1 + h2;
    res.ok = verify_cover(dist, res.cover) && res.cover.S <= res.bound;
    return res;
}

// ---------------------------------------------------------------- JSON

nlohmann::json trace_to_json(const StageTrace& t) {
    nlohmann::json j;
    j["n"] = t.n;
    j["g"] = t.g;
    j["split_ratio"] = rat(t.split_ratio);
    j["window_widened"] = t.window_widened;
    j["window"] = {rat(t.window_lo), rat(t.window_hi)};
    j["alpha"] = rats(t.alpha);
    j["beta"] = rats(t.beta);
    j["W_widths"] = rats(t.W_widths);
    j["D_widths"] = rats(t.D_widths);
    j["spacer_mass"] = rat(t.spacer_mass);
    j["h1_next"] = big(t.h1_next);
    j["h2_next"] = big(t.h2_next);
    j["H_next"] = big(t.H_next);
    j["R"] = big(t.R);
    j["N"] = t.N;
    j["N_source"] = t.N_source;
    j["tau_next"] = t.tau_next;
    j["tau_next_certified"] = t.tau_next_certified;
    j["e_words"] = t.e_words;
    j["w1_next"] = rat(t.w1_next);
    j["w2_next"] = rat(t.w2_next);
    j["relaxed"] = t.relaxed;
    return j;
}

static StageTrace trace_from_json(const nlohmann::json& j) {
    StageTrace t;
    t.n = j.at("n");
    t.g = j.at("g");
    t.split_ratio = parse_rational(j.at("split_ratio"));
    t.window_widened = j.at("window_widened");
    t.window_lo = parse_rational(j.at("window")[0]);
    t.window_hi = parse_rational(j.at("window")[1]);
    t.alpha = rats_from(j.at("alpha"));
    t.beta = rats_from(j.at("beta"));
    t.W_widths = rats_from(j.at("W_widths"));
    t.D_widths = rats_from(j.at("D_widths"));
    t.spacer_mass = parse_rational(j.at("spacer_mass"));
    t.h1_next = parse_bigint(j.at("h1_next"));
    t.h2_next = parse_bigint(j.at("h2_next"));
    t.H_next = parse_bigint(j.at("H_next"));
    t.R = parse_bigint(j.at("R"));
    t.N = j.at("N");
    t.N_source = j.at("N_source");
    t.tau_next = j.at("tau_next");
    t.tau_next_certified = j.at("tau_next_certified");
    t.e_words = j.at("e_words");
    t.w1_next = parse_rational(j.at("w1_next"));
    t.w2_next = parse_rational(j.at("w2_next"));
    t.relaxed = j.at("relaxed").get<std::vector<std::string>>();
    return t;
}

nlohmann::json system_to_json(const RankTwoSystem& s) {
    nlohmann::json j;
    j["format"] = "slowent-system-1";
    j["profile"] = profile_to_json(s.profile);
    j["n"] = s.n;
    j["tower1"] = {{"width", rat(s.tower1.width)}, {"height", big(s.tower1.height)}};
    j["tower2"] = {{"width", rat(s.tower2.width)}, {"height", big(s.tower2.height)}};
    j["H_prev"] = big(s.H_prev);
    j["H"] = big(s.H);
    j["tau"] = s.tau;
    j["tau_certified"] = s.tau_certified;
    j["initial_mass"] = rat(s.initial_mass);
    j["spacer_mass_ledger"] = rats(s.spacer_mass_ledger);
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& r : s.history) {
        nlohmann::json h;
        h["n"] = r.n;
        h["h1"] = big(r.h1);
        h["h2"] = big(r.h2);
        h["w1"] = rat(r.w1);
        h["w2"] = rat(r.w2);
        h["H_prev"] = big(r.H_prev);
        h["H"] = big(r.H);
        h["C"] = r.C;
        h["tau"] = r.tau;
        h["tau_certified"] = r.tau_certified;
        h["advanced"] = r.advanced;
        if (r.advanced) {
            h["g"] = r.g;
            h["a_words"] = words_block(r.a_words, static_cast<std::uint32_t>(2 * r.C));
            h["e_base"] = words_block(r.e_base, static_cast<std::uint32_t>(r.C));
            h["e_repeats"] = big(r.e_repeats);
            h["R"] = big(r.R);
            h["N"] = r.N;
        }
        hist.push_back(h);
    }
    j["history"] = hist;
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& t : s.traces) tr.push_back(trace_to_json(t));
    j["traces"] = tr;
    return j;
}

RankTwoSystem system_from_json(const nlohmann::json& j) {
    if (j.value("format", std::string()) != "slowent-system-1") throw Error("not a slowent system document");
    RankTwoSystem s;
    s.profile = profile_from_json(j.at("profile"));
    s.n = j.at("n");
    s.tower1 = {parse_rational(j.at("tower1").at("width")), parse_bigint(j.at("tower1").at("height"))};
    s.tower2 = {parse_rational(j.at("tower2").at("width")), parse_bigint(j.at("tower2").at("height"))};
    s.H_prev = parse_bigint(j.at("H_prev"));
    s.H = parse_bigint(j.at("H"));
    s.tau = j.at("tau");
    s.tau_certified = j.at("tau_certified");
    s.initial_mass = parse_rational(j.at("initial_mass"));
    s.spacer_mass_ledger = rats_from(j.at("spacer_mass_ledger"));
    for (const auto& h : j.at("history")) {
        StageRecord r;
        r.n = h.at("n");
        r.h1 = parse_bigint(h.at("h1"));
        r.h2 = parse_bigint(h.at("h2"));
        r.w1 = parse_rational(h.at("w1"));
        r.w2 = parse_rational(h.at("w2"));
        r.H_prev = parse_bigint(h.at("H_prev"));
        r.H = parse_bigint(h.at("H"));
        r.C = h.at("C");
        r.tau = h.at("tau");
        r.tau_certified = h.at("tau_certified");
        r.advanced = h.at("advanced");
        if (r.advanced) {
            r.g = h.at("g");
            r.a_words = words_from_block(h.at("a_words"));
            r.e_base = words_from_block(h.at("e_base"));
            r.e_repeats = parse_bigint(h.at("e_repeats"));
            r.R = parse_bigint(h.at("R"));
            r.N = h.at("N");
        }
        s.history.push_back(std::move(r));
    }
    for (const auto& t : j.at("traces")) s.traces.push_back(trace_from_json(t));
    if (s.history.size() != s.n) throw Error("system document: history length does not match the stage");
    return s;
}

}  // namespace slowent
