#include "slowent/abc.hpp"

#include <cmath>

namespace slowent {

using nlohmann::json;

std::string kind_name(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::rigid_upper: return "rigid_upper";
        case ScheduleKind::rigid_lower: return "rigid_lower";
        case ScheduleKind::rigid_lower_inf: return "rigid_lower_inf";
        case ScheduleKind::cyclic_upper: return "cyclic_upper";
        case ScheduleKind::cyclic_lower: return "cyclic_lower";
        case ScheduleKind::cyclic_inf: return "cyclic_inf";
        case ScheduleKind::custom: return "custom";
    }
    return "custom";
}

ScheduleKind parse_kind(const std::string& s) {
    for (auto k : {ScheduleKind::rigid_upper, ScheduleKind::rigid_lower, ScheduleKind::rigid_lower_inf,
                   ScheduleKind::cyclic_upper, ScheduleKind::cyclic_lower, ScheduleKind::cyclic_inf,
                   ScheduleKind::custom})
        if (kind_name(k) == s) return k;
    throw Error("unknown schedule kind '" + s + "'");
}

bool AbcSchedule::eps_product_certified() const {
    Rational prod = 1;
    for (const auto& e : eps_seq) prod *= 1 - e;
    return prod > Rational(1, 2);
}

BigInt AbcSchedule::q_next() const {
    if (stages.empty()) throw Error("empty schedule");
    const auto& st = stages.back();
    return st.k * st.l * st.q * st.q;
}

namespace {

bool is_cyclic(ScheduleKind k) {
    return k == ScheduleKind::cyclic_upper || k == ScheduleKind::cyclic_lower || k == ScheduleKind::cyclic_inf;
}
bool is_rigid(ScheduleKind k) {
    return k == ScheduleKind::rigid_upper || k == ScheduleKind::rigid_lower || k == ScheduleKind::rigid_lower_inf;
}

struct Ctx {
    std::uint64_t stage;
    std::uint64_t budget;
    [[noreturn]] void fail(const std::string& clause, const std::string& why) const {
        throw Error("stage " + std::to_string(stage) + ", clause " + clause + ": " + why);
    }
    BigInt pow(const BigInt& base, const BigInt& e, const std::string& clause) const {
        if (base <= 1 || e == 0) return base == 0 && e > 0 ? BigInt(0) : BigInt(1);
        long double bits = static_cast<long double>(bit_length(base)) * e.convert_to<long double>();
        if (bits > static_cast<long double>(budget))
            fail(clause, "value needs about " + std::to_string(static_cast<double>(bits)) +
                             " bits, over the budget of " + std::to_string(budget) + "; supply an override");
        return ipow(base, e.convert_to<std::uint64_t>());
    }
    // floor(c * X^{1/b}) with the same guard on X.
    BigInt root(const Rational& c, const BigInt& X, const BigInt& b, const std::string& clause) const {
        if (b > 1000000) fail(clause, "root index too large");
        return floor_mul_root(c, X, b.convert_to<unsigned>());
    }
};

BigInt next_multiple(const BigInt& lo, const BigInt& m) { return ceil_div(lo, m) * m; }
BigInt max3(const BigInt& a, const BigInt& b, const BigInt& c) { return std::max(a, std::max(b, c)); }

const Rational& require_u(const std::optional<Rational>& u, ScheduleKind kind) {
    if (!u) throw Error(kind_name(kind) + " needs a finite u");
    if (*u <= 0) throw Error("u must be positive");
    return *u;
}

// Formula values shared by build and validate.
BigInt f_rigid_upper_s(const Ctx& c, const StageParams& st, const Rational& u, const BigInt& s_prev) {
    BigInt a = num(u), b = den(u);
    BigInt X = c.pow(st.k, st.q * b, "s_n formula") * c.pow(st.q, 2 * a, "s_n formula");
    return c.root(8 / st.eps, X, b, "s_n formula") * s_prev;
}
BigInt f_rigid_upper_l(const Ctx& c, const StageParams& st, const Rational& u) {
    BigInt a = num(u), b = den(u);
    return c.root(8 / st.eps, c.pow(st.k, st.q * b, "l_n formula"), a, "l_n formula");
}
BigInt f_rigid_lower_l(const Ctx& c, const StageParams& st, const BigInt& k_prev) {
    return floor_rat(6 / st.eps * Rational(c.pow(k_prev, st.n - 1, "l_n formula")));
}
BigInt f_rigid_lower_s(const Ctx& c, const StageParams& st, const BigInt& k, const BigInt& k_prev, const Rational& u) {
    BigInt a = num(u), b = den(u);
    return c.root(1, c.pow(k * k_prev, BigInt(st.n) * a, "s_n formula"), b, "s_n formula");
}
BigInt f_lower_inf_s(const Ctx& c, const StageParams& st, const BigInt& k, const BigInt& l_next, const Rational& u_next) {
    BigInt a = num(u_next), b = den(u_next);
    return c.root(1, c.pow(k * l_next * st.q, a, "s_n formula"), b, "s_n formula");
}
BigInt f_cyclic_upper_k(const Ctx& c, const StageParams& st, const BigInt& r, const Rational& u) {
    BigInt a = num(u), b = den(u);
    return r * c.root(1, c.pow(r, st.q * a, "k_n formula"), b, "k_n formula");
}
BigInt f_cyclic_lower_l(const Ctx& c, const StageParams& st, const BigInt& r_prev, const Rational& u) {
    BigInt a = num(u), b = den(u);
    if (a > b) throw Error("cyclic_lower needs u <= 1");
    return c.root(6 / st.eps, c.pow(r_prev, BigInt(st.n) * (b - a), "l_n formula"), a, "l_n formula");
}
BigInt f_cyclic_lower_k(const Ctx& c, const StageParams& st, const BigInt& r, const BigInt& r_prev) {
    return c.pow(r_prev, st.n, "k_n formula") * c.pow(r, st.n + 1, "k_n formula");
}
BigInt f_cyclic_inf_k(const Ctx& c, const StageParams& st, const BigInt& r, const Rational& u_n) {
    BigInt a = num(u_n), b = den(u_n);
    return r * c.root(1, c.pow(r * st.l * st.q, a, "k_n formula"), b, "k_n formula");
}

bool has(const StageParams& st, const char* f) {
    for (const auto& x : st.overridden)
        if (x == f) return true;
    return false;
}

}  // namespace

AbcSchedule build_schedule(ScheduleKind kind, std::optional<Rational> u, const ScheduleSeeds& seeds,
                           std::uint64_t n_max) {
    if (n_max == 0) throw Error("n_max must be positive");
    if (seeds.q1 <= 0 || seeds.s0 <= 0 || seeds.k0 <= 0 || seeds.r0 <= 0)
        throw Error("schedule seeds must be positive");
    if (gcd(seeds.p1, seeds.q1) != 1) throw Error("seed gcd(p_1, q_1) != 1");
    if (seeds.eps.size() < n_max) throw Error("eps sequence shorter than n_max");
    const bool inf_kind = kind == ScheduleKind::rigid_lower_inf || kind == ScheduleKind::cyclic_inf;
    if (inf_kind && u) throw Error(kind_name(kind) + " targets infinity; u must be omitted");
    if (kind == ScheduleKind::rigid_lower_inf && seeds.u_seq.size() < n_max + 1)
        throw Error("rigid_lower_inf needs u_1 .. u_{n_max+1}");
    if (kind == ScheduleKind::cyclic_inf && seeds.u_seq.size() < n_max)
        throw Error("cyclic_inf needs u_1 .. u_{n_max}");
    if (is_cyclic(kind) && seeds.k0 % seeds.r0 != 0) throw Error("seed r_0 must divide k_0");

    AbcSchedule sch;
    sch.kind = kind;
    sch.u = u;
    sch.s0 = seeds.s0;
    sch.k0 = seeds.k0;
    sch.r0 = seeds.r0;
    sch.eps_seq.assign(seeds.eps.begin(), seeds.eps.begin() + static_cast<std::ptrdiff_t>(n_max));
    for (const auto& e : sch.eps_seq)
        if (e <= 0 || e >= 1) throw Error("eps_n must lie in (0, 1)");

    BigInt q = seeds.q1, p = seeds.p1, s_prev = seeds.s0, k_prev = seeds.k0, r_prev = seeds.r0;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
        Ctx c{n, seeds.bit_budget};
        StageParams st;
        st.n = n;
        st.q = q;
        st.p = p;
        st.alpha = Rational(p, q);
        st.eps = sch.eps_seq[n - 1];
        if (inf_kind) st.u_n = seeds.u_seq[n - 1];
        StageOverride ov;
        if (auto it = seeds.overrides.find(n); it != seeds.overrides.end()) ov = it->second;
        if (ov.k) st.overridden.push_back("k");
        if (ov.l) st.overridden.push_back("l");
        if (ov.s) st.overridden.push_back("s");
        if (ov.r) st.overridden.push_back("r");
        BigInt fl = 0;
        if (auto it = seeds.floor.find(n); it != seeds.floor.end()) fl = it->second;
        st.floor = fl;

        switch (kind) {
            case ScheduleKind::rigid_upper: {
                const Rational& uu = require_u(u, kind);
                if (!ov.k && !seeds.floor.count(n))
                    c.fail("k_n >= K_0", "no K_0 estimate or override supplied");
                st.k = ov.k ? *ov.k : next_multiple(std::max<BigInt>(fl, 1), s_prev);
                st.s = ov.s ? *ov.s : f_rigid_upper_s(c, st, uu, s_prev);
                st.l = ov.l ? *ov.l : f_rigid_upper_l(c, st, uu);
                break;
            }
            case ScheduleKind::rigid_lower:
            case ScheduleKind::rigid_lower_inf: {
                const bool lower = kind == ScheduleKind::rigid_lower;
                if (lower) {
                    require_u(u, kind);
                    st.l = ov.l ? *ov.l : f_rigid_lower_l(c, st, k_prev);
                } else {
                    st.l = ov.l ? *ov.l : BigInt(n * n);
                }
                const BigInt l_next = BigInt((n + 1) * (n + 1));
                auto s_of = [&](const BigInt& k) {
                    return lower ? f_rigid_lower_s(c, st, k, k_prev, *u)
                                 : f_lower_inf_s(c, st, k, l_next, seeds.u_seq[n]);
                };
                if (ov.k) {
                    st.k = *ov.k;
                    st.s = ov.s ? *ov.s : s_of(st.k);
                } else {
                    if (!seeds.floor.count(n)) c.fail("k_n >= K_0", "no K_0 estimate or override supplied");
                    BigInt k = next_multiple(max3(fl, ceil_rat(4 / st.eps), 1), s_prev);
                    bool found = false;
                    for (std::uint64_t tries = 0; tries < seeds.search_limit; ++tries, k += s_prev) {
                        BigInt s = ov.s ? *ov.s : s_of(k);
                        if (s > 0 && s % s_prev == 0) {
                            st.k = k;
                            st.s = s;
                            found = true;
                            break;
                        }
                    }
                    if (!found)
                        c.fail("s_{n-1} | s_n", "no multiple k of s_{n-1} within the search limit makes s_n a multiple");
                }
                break;
            }
            case ScheduleKind::cyclic_upper:
            case ScheduleKind::cyclic_lower:
            case ScheduleKind::cyclic_inf: {
                st.s = ov.s ? *ov.s : 2 * s_prev;
                if (kind == ScheduleKind::cyclic_lower)
                    st.l = ov.l ? *ov.l : f_cyclic_lower_l(c, st, r_prev, require_u(u, kind));
                else if (kind == ScheduleKind::cyclic_inf)
                    st.l = ov.l ? *ov.l : BigInt(n * n);
                Rational lo = kind == ScheduleKind::cyclic_upper ? Rational(12) / st.eps
                              : kind == ScheduleKind::cyclic_lower ? Rational(4) / st.eps
                                                                   : Rational(6) / st.eps;
                if (!ov.r && !seeds.floor.count(n)) c.fail("r_n >= L_0", "no L_0 estimate or override supplied");
                BigInt r = ov.r ? *ov.r : next_multiple(max3(fl, ceil_rat(lo), 1), lcm(k_prev, st.s));
                st.r = r;
                if (kind == ScheduleKind::cyclic_upper) {
                    const Rational& uu = require_u(u, kind);
                    st.k = ov.k ? *ov.k : f_cyclic_upper_k(c, st, r, uu);
                    st.l = ov.l ? *ov.l : c.pow(r, st.q, "l_n formula");
                } else if (kind == ScheduleKind::cyclic_lower) {
                    st.k = ov.k ? *ov.k : f_cyclic_lower_k(c, st, r, r_prev);
                } else {
                    st.k = ov.k ? *ov.k : f_cyclic_inf_k(c, st, r, *st.u_n);
                }
                break;
            }
            case ScheduleKind::custom:
                if (!ov.k || !ov.l || !ov.s) c.fail("custom", "custom schedules need k, l and s overrides");
                st.k = *ov.k;
                st.l = *ov.l;
                st.s = *ov.s;
                if (ov.r) st.r = *ov.r;
                break;
        }
        if (st.k <= 0 || st.l <= 0 || st.s <= 0) c.fail("positivity", "k, l and s must be positive");
        if (is_rigid(kind) && st.s % s_prev != 0) c.fail("s_{n-1} | s_n", "s_n = " + st.s.str());
        if (is_rigid(kind) && st.k % s_prev != 0) c.fail("s_{n-1} | k_n", "k_n = " + st.k.str());
        if (is_cyclic(kind)) {
            if (st.s % s_prev != 0 || st.s <= s_prev) c.fail("s_{n-1} | s_n, s_n > s_{n-1}", "s_n = " + st.s.str());
            if (*st.r % k_prev != 0) c.fail("k_{n-1} | r_n", "r_n = " + st.r->str());
            if (*st.r % st.s != 0) c.fail("s_n | r_n", "r_n = " + st.r->str());
            if (st.k % *st.r != 0) c.fail("r_n | k_n", "k_n = " + st.k.str());
        }
        sch.stages.push_back(st);

        BigInt step = st.k * st.l * q;
        if (bit_length(step) + bit_length(q) > seeds.bit_budget) c.fail("q_{n+1}", "q_{n+1} exceeds the bit budget");
        p = p * step + 1;
        q = step * q;
        s_prev = st.s;
        k_prev = st.k;
        if (st.r) r_prev = *st.r;
    }
    if (kind == ScheduleKind::rigid_lower_inf) {
        // a_m(u_{n+1}) >= a_{m^2}(u_n) for the polynomial scale, on a finite m-grid.
        for (std::size_t i = 0; i + 1 < seeds.u_seq.size(); ++i) {
            double un = to_double(seeds.u_seq[i]), un1 = to_double(seeds.u_seq[i + 1]);
            bool ok = true;
            for (int m = 2; m <= 1000 && ok; ++m) ok = un1 * std::log(m) >= 2 * un * std::log(m) - 1e-12;
            sch.notes.push_back("u-growth grid check n=" + std::to_string(i + 1) + ": " + (ok ? "ok" : "fails"));
        }
    }
    if (!sch.eps_product_certified()) sch.notes.push_back("prod(1 - eps_n) <= 1/2 over listed stages");
    return sch;
}

std::vector<ClauseCheck> validate_schedule(const AbcSchedule& s, const ScheduleSeeds* seeds) {
    std::vector<ClauseCheck> out;
    auto add = [&](std::uint64_t n, std::string clause, bool ok) { out.push_back({n, std::move(clause), ok}); };
    BigInt s_prev = s.s0, k_prev = s.k0, r_prev = s.r0;
    const std::uint64_t budget = seeds ? seeds->bit_budget : (1u << 20);
    for (std::size_t i = 0; i < s.stages.size(); ++i) {
        const auto& st = s.stages[i];
        Ctx c{st.n, budget};
        add(st.n, "stage index", st.n == i + 1);
        add(st.n, "gcd(p_n, q_n) = 1", gcd(st.p, st.q) == 1);
        add(st.n, "alpha_n = p_n / q_n", st.alpha == Rational(st.p, st.q));
        if (i + 1 < s.stages.size()) {
            const auto& nx = s.stages[i + 1];
            add(st.n, "q_{n+1} = k_n l_n q_n^2", nx.q == st.k * st.l * st.q * st.q);
            add(st.n, "alpha_{n+1} - alpha_n = 1/(k_n l_n q_n^2)",
                nx.alpha - st.alpha == Rational(BigInt(1), st.k * st.l * st.q * st.q));
        }
        if (is_rigid(s.kind)) {
            add(st.n, "s_{n-1} | s_n", st.s % s_prev == 0);
            add(st.n, "s_{n-1} | k_n", st.k % s_prev == 0);
        }
        if (is_cyclic(s.kind)) {
            add(st.n, "s_{n-1} | s_n, s_n > s_{n-1}", st.s % s_prev == 0 && st.s > s_prev);
            add(st.n, "r_n present", st.r.has_value());
            if (st.r) {
                add(st.n, "k_{n-1} | r_n", *st.r % k_prev == 0);
                add(st.n, "s_n | r_n", *st.r % st.s == 0);
                add(st.n, "r_n | k_n", st.k % *st.r == 0);
            }
        }
        try {
            switch (s.kind) {
                case ScheduleKind::rigid_upper:
                    if (!has(st, "s")) add(st.n, "s_n formula", st.s == f_rigid_upper_s(c, st, *s.u, s_prev));
                    if (!has(st, "l")) add(st.n, "l_n formula", st.l == f_rigid_upper_l(c, st, *s.u));
                    if (!has(st, "k")) add(st.n, "k_n >= K_0", st.k >= st.floor);
                    break;
                case ScheduleKind::rigid_lower:
                    if (!has(st, "l")) add(st.n, "l_n formula", st.l == f_rigid_lower_l(c, st, k_prev));
                    if (!has(st, "s")) add(st.n, "s_n formula", st.s == f_rigid_lower_s(c, st, st.k, k_prev, *s.u));
                    if (!has(st, "k")) add(st.n, "k_n >= max(K_0, 4/eps_n)", st.k >= st.floor && st.k >= 4 / st.eps);
                    break;
                case ScheduleKind::rigid_lower_inf:
                    if (!has(st, "l")) add(st.n, "l_n = n^2", st.l == st.n * st.n);
                    if (!has(st, "s") && i + 1 < s.stages.size() && s.stages[i + 1].u_n)
                        add(st.n, "s_n formula",
                            st.s == f_lower_inf_s(c, st, st.k, BigInt((st.n + 1) * (st.n + 1)), *s.stages[i + 1].u_n));
                    if (!has(st, "k")) add(st.n, "k_n >= max(K_0, 4/eps_n)", st.k >= st.floor && st.k >= 4 / st.eps);
                    break;
                case ScheduleKind::cyclic_upper:
                    if (!has(st, "k")) add(st.n, "k_n = r_n floor(r_n^{q_n u})", st.k == f_cyclic_upper_k(c, st, *st.r, *s.u));
                    if (!has(st, "l")) add(st.n, "l_n = r_n^{q_n}", st.l == c.pow(*st.r, st.q, "l_n formula"));
                    if (!has(st, "r")) add(st.n, "r_n >= max(L_0, 12/eps_n)", *st.r >= st.floor && *st.r >= 12 / st.eps);
                    break;
                case ScheduleKind::cyclic_lower:
                    if (!has(st, "l")) add(st.n, "l_n formula", st.l == f_cyclic_lower_l(c, st, r_prev, *s.u));
                    if (!has(st, "k")) add(st.n, "k_n = r_{n-1}^n r_n^{n+1}", st.k == f_cyclic_lower_k(c, st, *st.r, r_prev));
                    if (!has(st, "r")) add(st.n, "r_n >= max(L_0, 4/eps_n)", *st.r >= st.floor && *st.r >= 4 / st.eps);
                    break;
                case ScheduleKind::cyclic_inf:
                    if (!has(st, "l")) add(st.n, "l_n = n^2", st.l == st.n * st.n);
                    if (!has(st, "k") && st.u_n) add(st.n, "k_n = r_n floor(a(u_n))", st.k == f_cyclic_inf_k(c, st, *st.r, *st.u_n));
                    if (!has(st, "r")) add(st.n, "r_n >= max(L_0, 6/eps_n)", *st.r >= st.floor && *st.r >= 6 / st.eps);
                    break;
                case ScheduleKind::custom:
                    break;
            }
        } catch (const Error& e) {
            add(st.n, std::string("formula evaluation: ") + e.what(), false);
        }
        s_prev = st.s;
        k_prev = st.k;
        if (st.r) r_prev = *st.r;
    }
    return out;
}

namespace {
json rat(const Rational& r) { return to_string(r); }
Rational rat_of(const json& j) { return parse_rational(j.get<std::string>()); }
}  // namespace

json schedule_to_json(const AbcSchedule& s) {
    json j;
    j["kind"] = kind_name(s.kind);
    j["u"] = s.u ? rat(*s.u) : json("inf");
    j["s0"] = s.s0.str();
    j["k0"] = s.k0.str();
    j["r0"] = s.r0.str();
    j["eps_seq"] = json::array();
    for (const auto& e : s.eps_seq) j["eps_seq"].push_back(rat(e));
    j["stages"] = json::array();
    for (const auto& st : s.stages) {
        json o;
        o["n"] = st.n;
        o["q"] = st.q.str();
        o["p"] = st.p.str();
        o["k"] = st.k.str();
        o["l"] = st.l.str();
        o["s"] = st.s.str();
        o["r"] = st.r ? json(st.r->str()) : json(nullptr);
        o["alpha"] = rat(st.alpha);
        o["eps"] = rat(st.eps);
        o["u_n"] = st.u_n ? rat(*st.u_n) : json(nullptr);
        o["floor"] = st.floor.str();
        o["overridden"] = st.overridden;
        j["stages"].push_back(o);
    }
    j["notes"] = s.notes;
    return j;
}

AbcSchedule schedule_from_json(const json& j) {
    AbcSchedule s;
    try {
        s.kind = parse_kind(j.at("kind").get<std::string>());
        const auto& u = j.at("u");
        if (u.get<std::string>() != "inf") s.u = rat_of(u);
        s.s0 = parse_bigint(j.at("s0").get<std::string>());
        s.k0 = parse_bigint(j.at("k0").get<std::string>());
        s.r0 = parse_bigint(j.at("r0").get<std::string>());
        for (const auto& e : j.at("eps_seq")) s.eps_seq.push_back(rat_of(e));
        for (const auto& o : j.at("stages")) {
            StageParams st;
            st.n = o.at("n").get<std::uint64_t>();
            st.q = parse_bigint(o.at("q").get<std::string>());
            st.p = parse_bigint(o.at("p").get<std::string>());
            st.k = parse_bigint(o.at("k").get<std::string>());
            st.l = parse_bigint(o.at("l").get<std::string>());
            st.s = parse_bigint(o.at("s").get<std::string>());
            if (!o.at("r").is_null()) st.r = parse_bigint(o.at("r").get<std::string>());
            st.alpha = rat_of(o.at("alpha"));
            st.eps = rat_of(o.at("eps"));
            if (!o.at("u_n").is_null()) st.u_n = rat_of(o.at("u_n"));
            st.floor = parse_bigint(o.at("floor").get<std::string>());
            st.overridden = o.at("overridden").get<std::vector<std::string>>();
            s.stages.push_back(st);
        }
        s.notes = j.at("notes").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw Error(std::string("malformed schedule JSON: ") + e.what());
    }
    return s;
}

SafeDomainBound safe_domain_bound(const AbcSchedule& s, std::uint64_t n, std::uint64_t horizon) {
    if (n < 1 || n > horizon || horizon > s.stages.size())
        throw Error("safe_domain_bound: stages must satisfy 1 <= n <= horizon <= " + std::to_string(s.stages.size()));
    SafeDomainBound b;
    b.n = n;
    b.horizon = horizon;
    Rational sum = 0;
    for (std::uint64_t m = n; m <= horizon; ++m) {
        Rational t = Rational(BigInt(2), s.stages[m - 1].l);
        sum += t;
        b.single_stage.emplace_back(m, std::max(Rational(0), Rational(1 - t)));
    }
    b.measure_lower_bound = std::max(Rational(0), Rational(1 - sum));
    return b;
}

}  // namespace slowent
