#include "slowent/experiments.hpp"
#include "slowent/hash.hpp"
#include "slowent/serialize.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace slowent {

namespace fs = std::filesystem;

namespace {

// Typed access to a config object; every key read is marked, the rest are rejected by finish().
class Params {
public:
    Params(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
    }

    bool has(const std::string& k) {
        used_.insert(k);
        return j_.contains(k) && !j_[k].is_null();
    }
    const json& raw(const std::string& k) {
        if (!has(k)) throw ConfigError(where_ + ": missing required key '" + k + "'");
        return j_[k];
    }
    std::uint64_t u64(const std::string& k, std::optional<std::uint64_t> def = std::nullopt) {
        if (!has(k)) return need(k, def);
        const json& v = j_[k];
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw ConfigError(where_ + "." + k + " must be a non-negative integer");
        return v.get<std::uint64_t>();
    }
    BigInt big(const std::string& k, std::optional<BigInt> def = std::nullopt) {
        if (!has(k)) return need(k, def);
        const json& v = j_[k];
        try {
            if (v.is_number_integer()) return BigInt(v.get<std::int64_t>());
            if (v.is_string()) return parse_bigint(v.get<std::string>());
        } catch (const Error& e) {
            throw ConfigError(where_ + "." + k + ": " + e.what());
        }
        throw ConfigError(where_ + "." + k + " must be an integer or decimal string");
    }
    Rational rational(const std::string& k, std::optional<Rational> def = std::nullopt) {
        if (!has(k)) return need(k, def);
        return as_rational(j_[k], where_ + "." + k);
    }
    std::string str(const std::string& k, std::optional<std::string> def = std::nullopt) {
        if (!has(k)) return need(k, def);
        if (!j_[k].is_string()) throw ConfigError(where_ + "." + k + " must be a string");
        return j_[k].get<std::string>();
    }
    bool boolean(const std::string& k, std::optional<bool> def = std::nullopt) {
        if (!has(k)) return need(k, def);
        if (!j_[k].is_boolean()) throw ConfigError(where_ + "." + k + " must be a boolean");
        return j_[k].get<bool>();
    }
    std::vector<Rational> rationals(const std::string& k, std::optional<std::vector<Rational>> def = std::nullopt) {
        if (!has(k)) return need(k, def);
        const json& v = j_[k];
        if (!v.is_array()) throw ConfigError(where_ + "." + k + " must be an array");
        std::vector<Rational> out;
        for (const auto& x : v) out.push_back(as_rational(x, where_ + "." + k));
        return out;
    }
    std::vector<std::uint64_t> u64s(const std::string& k, std::optional<std::vector<std::uint64_t>> def = std::nullopt) {
        if (!has(k)) return need(k, def);
        const json& v = j_[k];
        if (!v.is_array()) throw ConfigError(where_ + "." + k + " must be an array");
        std::vector<std::uint64_t> out;
        for (const auto& x : v) {
            if (!x.is_number_unsigned()) throw ConfigError(where_ + "." + k + " must hold non-negative integers");
            out.push_back(x.get<std::uint64_t>());
        }
        return out;
    }
    Params sub(const std::string& k) { return Params(raw(k), where_ + "." + k); }
    std::vector<Params> list(const std::string& k) {
        const json& v = raw(k);
        if (!v.is_array()) throw ConfigError(where_ + "." + k + " must be an array");
        std::vector<Params> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], where_ + "." + k + "[" + std::to_string(i) + "]");
        return out;
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }
    const std::string& where() const { return where_; }

private:
    template <class T>
    T need(const std::string& k, const std::optional<T>& def) {
        if (!def) throw ConfigError(where_ + ": missing required key '" + k + "'");
        return *def;
    }
    static Rational as_rational(const json& v, const std::string& where) {
        try {
            if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
            if (v.is_string()) return parse_rational(v.get<std::string>());
        } catch (const Error& e) {
            throw ConfigError(where + ": " + e.what());
        }
        throw ConfigError(where + " must be a rational (\"p/q\" string) or integer");
    }

    json j_;
    std::string where_;
    std::set<std::string> used_;
};

struct Ctx {
    std::string experiment;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    fs::path config_dir;
    std::map<std::string, std::string> artifacts;

    std::uint64_t need_seed() const {
        if (!seed) throw ConfigError(experiment + " is randomized: a seed is required (config 'seed' or --seed)");
        return *seed;
    }
    std::string path(const std::string& p) const {
        const fs::path q(p);
        return (q.is_absolute() ? q : config_dir / q).string();
    }
    void emit(const std::string& name, std::string content) { artifacts[name] = std::move(content); }
    void emit_json(const std::string& name, const json& j) { emit(name, j.dump(2) + "\n"); }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Every experiment parses its parameters, then returns the pipeline to run.
using Pipeline = std::function<void(Ctx&)>;

VerifyOptions::Mode parse_mode(const std::string& s) {
    if (s == "automatic") return VerifyOptions::Mode::automatic;
    if (s == "exhaustive") return VerifyOptions::Mode::exhaustive;
    if (s == "sampled") return VerifyOptions::Mode::sampled;
    throw ConfigError("mode must be automatic, exhaustive or sampled");
}

GrowthSequence parse_growth(Params& p, const std::string& key) {
    if (!p.has(key)) return GrowthSequence::polynomial(2);
    try {
        return growth_from_json(p.raw(key));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(p.where() + "." + key + ": " + e.what());
    }
}

struct CollectionSpec {
    SamplerParams params;
    SampleOptions opts;
};

CollectionSpec parse_collection(Params& p, bool with_N = true) {
    CollectionSpec c;
    c.params.sigma = static_cast<std::uint32_t>(p.u64("sigma", 4));
    c.params.k = p.u64("k");
    if (with_N) c.params.N = p.u64("N");
    c.params.eps = p.rational("eps", Rational(1, 10));
    c.params.gamma = p.rational("gamma", Rational(1, 20));
    c.params.b = parse_growth(p, "b");
    if (p.has("sigma_budget")) c.params.sigma_budget = p.rational("sigma_budget");
    c.opts.retry_budget = p.u64("retry_budget", 64);
    c.opts.mode = parse_mode(p.str("mode", std::string("automatic")));
    return c;
}

Profile parse_profile(Params& p) {
    const json& v = p.raw("profile");
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "paper") return Profile::paper_profile();
        if (s.rfind("desk-C", 0) == 0) {
            try {
                const std::uint64_t C = std::stoull(s.substr(6));
                if (C >= 1 && C <= 64) return Profile::desk(C);
            } catch (const std::exception&) {
            }
        }
        throw ConfigError(p.where() + ".profile must be \"paper\", \"desk-C<n>\" or an object");
    }
    try {
        return profile_from_json(v);
    } catch (const std::exception& e) {
        throw ConfigError(p.where() + ".profile: " + e.what());
    }
}

RankTwoSystem build_system(const Profile& prof, std::uint64_t stages, std::uint64_t seed) {
    RankTwoSystem s = init_system(prof);
    for (std::uint64_t i = 0; i < stages; ++i) s = advance_stage(s, seed + i).first;
    return s;
}

std::string words_text(const std::vector<Word>& ws, std::uint32_t sigma, std::optional<std::uint64_t> stage = {}) {
    std::ostringstream os;
    write_words(os, ws, sigma, stage);
    return os.str();
}

// ---------------------------------------------------------------- experiments

Pipeline sample_words(Params& p, Ctx& ctx) {
    CollectionSpec c = parse_collection(p);
    const std::uint64_t seed = ctx.need_seed();
    return [=](Ctx& cx) {
        SampleOptions o = c.opts;
        o.threads = cx.threads;
        const WordCollection col = sample_collection(c.params, seed, o);
        cx.emit("words.txt", words_text(col.theta, c.params.sigma));
        cx.emit_json("collection.json", collection_to_json(col));
    };
}

Pipeline verify_words(Params& p, Ctx& ctx) {
    const std::string file = ctx.path(p.str("words_file"));
    SamplerParams sp;
    sp.eps = p.rational("eps", Rational(1, 10));
    sp.gamma = p.rational("gamma", Rational(1, 20));
    sp.b = parse_growth(p, "b");
    const std::optional<std::uint64_t> tau = p.has("tau") ? std::optional(p.u64("tau")) : std::nullopt;
    const std::optional<std::uint64_t> beta = p.has("beta") ? std::optional(p.u64("beta")) : std::nullopt;
    VerifyOptions vo;
    vo.mode = parse_mode(p.str("mode", std::string("automatic")));
    vo.samples = p.u64("samples", 200000);
    if (vo.mode != VerifyOptions::Mode::exhaustive) vo.sample_seed = ctx.need_seed();
    return [=](Ctx& cx) mutable {
        std::istringstream is(read_file(file));
        const WordsFile wf = read_words(is);
        sp.sigma = wf.sigma;
        sp.k = wf.k;
        sp.N = wf.words.size();
        const Thresholds th = collection_thresholds(sp);
        vo.threads = cx.threads;
        const VerificationReport r = verify_collection(wf.words, sp, tau.value_or(th.tau), beta.value_or(th.beta), vo);
        cx.emit_json("verify.json", {{"params", params_to_json(sp)},
                                     {"tau", tau.value_or(th.tau)},
                                     {"beta", beta.value_or(th.beta)},
                                     {"report", report_to_json(r)}});
    };
}

Pipeline abc_build(Params& p, Ctx&) {
    const ScheduleKind kind = [&] {
        try {
            return parse_kind(p.str("kind"));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("params.kind: ") + e.what());
        }
    }();
    std::optional<Rational> u;
    if (p.has("u")) {
        const json& v = p.raw("u");
        if (!(v.is_string() && v.get<std::string>() == "inf")) u = p.rational("u");
    }
    const std::uint64_t n_max = p.u64("n_max", 3);
    ScheduleSeeds seeds;
    if (p.has("seeds")) {
        Params s = p.sub("seeds");
        seeds.q1 = s.big("q1", seeds.q1);
        seeds.p1 = s.big("p1", seeds.p1);
        seeds.s0 = s.big("s0", seeds.s0);
        seeds.k0 = s.big("k0", seeds.k0);
        seeds.r0 = s.big("r0", seeds.r0);
        seeds.eps = s.rationals("eps", seeds.eps);
        seeds.u_seq = s.rationals("u_seq", seeds.u_seq);
        seeds.bit_budget = s.u64("bit_budget", seeds.bit_budget);
        seeds.search_limit = s.u64("search_limit", seeds.search_limit);
        if (s.has("floor")) {
            Params f = s.sub("floor");
            const json& fj = s.raw("floor");
            for (auto it = fj.begin(); it != fj.end(); ++it) seeds.floor[std::stoull(it.key())] = f.big(it.key());
            f.finish();
        }
        if (s.has("overrides")) {
            const json& oj = s.raw("overrides");
            if (!oj.is_object()) throw ConfigError("params.seeds.overrides must be an object");
            for (auto it = oj.begin(); it != oj.end(); ++it) {
                Params o(it.value(), "params.seeds.overrides." + it.key());
                StageOverride so;
                for (const char* key : {"k", "l", "s", "r"})
                    if (o.has(key)) {
                        const BigInt v = o.big(key);
                        (key[0] == 'k' ? so.k : key[0] == 'l' ? so.l : key[0] == 's' ? so.s : so.r) = v;
                    }
                o.finish();
                seeds.overrides[std::stoull(it.key())] = so;
            }
        }
        s.finish();
    }
    std::optional<std::pair<std::uint64_t, std::uint64_t>> safe;
    if (p.has("safe_domain")) {
        Params s = p.sub("safe_domain");
        safe = std::pair(s.u64("n"), s.u64("horizon"));
        s.finish();
    }
    return [=](Ctx& cx) {
        const AbcSchedule sch = build_schedule(kind, u, seeds, n_max);
        cx.emit_json("schedule.json", schedule_to_json(sch));
        cx.emit_json("clauses.json", clauses_to_json(validate_schedule(sch, &seeds)));
        if (safe) cx.emit_json("safe_domain.json", safe_domain_to_json(safe_domain_bound(sch, safe->first, safe->second)));
    };
}

struct NamesSpec {
    std::uint64_t s_prev = 4, q = 3, p = 1, l = 8, s_n = 8;
    CollectionSpec col;
};

NamesSpec parse_names(Params& p) {
    NamesSpec n;
    n.s_prev = p.u64("s_prev", 4);
    n.q = p.u64("q", 3);
    n.p = p.u64("p", 1);
    n.l = p.u64("l", 8);
    n.s_n = p.u64("s_n", 8);
    Params c = p.sub("collection");
    n.col = parse_collection(c, false);
    c.finish();
    n.col.params.sigma = static_cast<std::uint32_t>(n.s_prev);
    n.col.params.N = n.s_n;
    return n;
}

struct BuiltNames {
    WordCollection col;
    StageNames names;
};

BuiltNames build_names(const NamesSpec& n, std::uint64_t seed, unsigned threads) {
    SampleOptions o = n.col.opts;
    o.threads = threads;
    BuiltNames b;
    b.col = sample_collection(n.col.params, seed, o);
    const StageNames zero = stage_zero_names(static_cast<std::uint32_t>(n.s_prev), n.q);
    b.names = stage_names_untwisted(zero, b.col.theta, n.s_n, n.q, n.p, n.l);
    return b;
}

Pipeline abc_separation(Params& p, Ctx& ctx) {
    const NamesSpec n = parse_names(p);
    const std::vector<std::uint64_t> grid = p.u64s("shift_grid", std::vector<std::uint64_t>{0});
    const std::uint64_t min_overlap = p.u64("min_overlap", 1);
    const std::uint64_t seed = ctx.need_seed();
    return [=](Ctx& cx) {
        const BuiltNames b = build_names(n, seed, cx.threads);
        const std::vector<std::size_t> g(grid.begin(), grid.end());
        const SeparationStats st = separation_stats(b.names.names, g, min_overlap, cx.threads);
        const Rational s(BigInt(n.s_prev));
        const Rational threshold = 1 - 1 / s - n.col.params.gamma * s - Rational(1) / Rational(BigInt(n.l));
        json j = separation_to_json(st);
        j["threshold"] = to_string(threshold);
        j["t0_ok"] = st.min_t0 && *st.min_t0 >= threshold;
        const std::optional<std::uint64_t> needed =
            st.certified_radius ? st.names_needed(*st.certified_radius) : std::nullopt;
        j["names_needed_at_certified_radius"] = needed ? json(*needed) : json(nullptr);
        cx.emit("collection.txt", words_text(b.col.theta, static_cast<std::uint32_t>(n.s_prev)));
        cx.emit_json("collection.json", collection_to_json(b.col));
        cx.emit("names.txt", words_text(b.names.names, b.names.alphabet + 2, 1));
        cx.emit_json("separation.json", j);
    };
}

Pipeline cutstack_build(Params& p, Ctx& ctx) {
    const Profile prof = parse_profile(p);
    const std::uint64_t stages = p.u64("stages", 2);
    const std::uint64_t seed = stages ? ctx.need_seed() : 0;
    return [=](Ctx& cx) {
        const RankTwoSystem s = build_system(prof, stages, seed);
        cx.emit_json("system.json", system_to_json(s));
        json tr = json::array();
        for (const auto& t : s.traces) tr.push_back(trace_to_json(t));
        cx.emit_json("traces.json", tr);
        cx.emit_json("mass.json", mass_to_json(mass_report(s)));
    };
}

json periodicity_json(const StageWords& w) {
    json a = json::array();
    for (std::size_t k = 0; k < w.w.size(); ++k) {
        const BigInt P = w.h1 + BigInt(k) * w.H_prev;
        const bool ok = w.w[k].length() == w.H && w.w[k].kind() == Rope::Kind::repeat && w.w[k].top_period() == P &&
                        w.z[k].length() == P;
        a.push_back({{"k", k}, {"length", to_string(w.w[k].length())}, {"period", to_string(P)}, {"ok", ok}});
    }
    return a;
}

Pipeline cutstack_check(Params& p, Ctx& ctx) {
    const Profile prof = parse_profile(p);
    const std::uint64_t stages = p.u64("stages", 0);
    const std::uint64_t ref = p.u64("reference_stage", 1);
    LemmaOptions lo;
    lo.grid = p.u64("grid", lo.grid);
    lo.alpha_work_cap = p.u64("alpha_work_cap", lo.alpha_work_cap);
    if (p.has("n_eff")) lo.n_eff_override = p.u64("n_eff");
    const std::uint64_t seed = stages ? ctx.need_seed() : 0;
    return [=](Ctx& cx) {
        const RankTwoSystem s = build_system(prof, stages, seed);
        const StageWords w = coding_words(s, ref);
        cx.emit_json("lemma.json", lemma_to_json(check_alignment_lemmas(w, s, lo)));
        cx.emit_json("periodicity.json", periodicity_json(w));
        cx.emit_json("mass.json", mass_to_json(mass_report(s)));
    };
}

std::vector<CutColumn> default_plan(const Rational& w1, const Rational& w2) {
    // one column stacks tower 2 on tower 1; the remainder of the wider tower stays alone
    if (w1 == 0) return {{{2}, w2}};
    if (w1 == w2) return {{{1, 2}, w1}};
    if (w1 < w2) return {{{1, 2}, w1}, {{2}, w2 - w1}};
    return {{{1, 2}, w2}, {{1}, w1 - w2}};
}

Pipeline nospacer_bench(Params& p, Ctx&) {
    struct Inst {
        std::uint64_t h1, h2;
        Rational w1, w2, eps;
        std::vector<CutColumn> plan;
    };
    std::vector<Inst> insts;
    for (Params& ip : p.list("instances")) {
        Inst in;
        in.h1 = ip.u64("h1");
        in.h2 = ip.u64("h2");
        in.w1 = ip.rational("w1", Rational(BigInt(1), BigInt(in.h1 + in.h2)));
        in.w2 = ip.rational("w2", Rational(BigInt(1), BigInt(in.h1 + in.h2)));
        in.eps = ip.rational("eps");
        if (ip.has("plan")) {
            for (Params& cp : ip.list("plan")) {
                CutColumn c;
                const json& ids = cp.raw("ids");
                if (!ids.is_array()) throw ConfigError(cp.where() + ".ids must be an array");
                for (const auto& x : ids) {
                    if (!x.is_number_integer()) throw ConfigError(cp.where() + ".ids must hold integers");
                    c.ids.push_back(x.get<int>());
                }
                c.width = cp.rational("width");
                cp.finish();
                in.plan.push_back(c);
            }
        } else {
            in.plan = default_plan(in.w1, in.w2);
        }
        ip.finish();
        insts.push_back(in);
    }
    return [=](Ctx& cx) {
        json all = json::array();
        std::string csv = s_table_header();
        for (const auto& in : insts) {
            const NoSpacerResult r = nospacer_baseline(in.h1, in.h2, in.w1, in.w2, in.plan, in.eps);
            json j = nospacer_to_json(r);
            j["h1"] = in.h1;
            j["h2"] = in.h2;
            j["eps"] = to_string(in.eps);
            all.push_back(j);
            csv += s_table_row(r.L, r.cover);
        }
        cx.emit_json("nospacer.json", all);
        cx.emit("s_table.csv", csv);
    };
}

Pipeline entropy(Params& p, Ctx& ctx) {
    Params src = p.sub("source");
    const std::string type = src.str("type");
    std::function<CodedDistribution(std::size_t, Ctx&)> dist;
    if (type == "words") {
        const std::string file = ctx.path(src.str("file"));
        dist = [file](std::size_t L, Ctx&) {
            std::istringstream is(read_file(file));
            return substring_distribution(read_words(is).words, L);
        };
    } else if (type == "collection") {
        const CollectionSpec c = parse_collection(src);
        const std::uint64_t seed = ctx.need_seed();
        auto cache = std::make_shared<std::optional<WordCollection>>();
        dist = [c, seed, cache](std::size_t L, Ctx& cx) {
            if (!*cache) {
                SampleOptions o = c.opts;
                o.threads = cx.threads;
                *cache = sample_collection(c.params, seed, o);
            }
            return substring_distribution((*cache)->theta, L);
        };
    } else if (type == "cutstack") {
        const Profile prof = parse_profile(src);
        const std::uint64_t stages = src.u64("stages", 0);
        const std::uint64_t ref = src.u64("reference_stage", 1);
        const std::uint64_t seed = stages ? ctx.need_seed() : 0;
        auto cache = std::make_shared<std::optional<RankTwoSystem>>();
        dist = [=](std::size_t L, Ctx&) {
            if (!*cache) *cache = build_system(prof, stages, seed);
            return coded_distribution(**cache, ref, L);
        };
    } else if (type == "abc") {
        const NamesSpec n = parse_names(src);
        const std::uint64_t seed = ctx.need_seed();
        auto cache = std::make_shared<std::optional<BuiltNames>>();
        dist = [=](std::size_t L, Ctx& cx) {
            if (!*cache) *cache = build_names(n, seed, cx.threads);
            return coded_distribution((*cache)->names, L);
        };
    } else {
        throw ConfigError("params.source.type must be words, collection, cutstack or abc");
    }
    src.finish();
    const std::vector<std::uint64_t> lengths = p.u64s("lengths");
    if (lengths.empty()) throw ConfigError("params.lengths must be non-empty");
    const Rational eps = p.rational("eps");
    const Rational mass_eps = p.rational("mass_eps", eps);
    const std::string method = p.str("method", std::string("auto"));
    if (method != "auto" && method != "greedy" && method != "exact")
        throw ConfigError("params.method must be auto, greedy or exact");
    const std::vector<Rational> t_grid =
        p.rationals("t_grid", std::vector<Rational>{Rational(1, 2), Rational(1), Rational(2)});
    const double threshold = to_double(p.rational("threshold", Rational(1, 100)));
    return [=](Ctx& cx) {
        std::string csv = s_table_header();
        json covers = json::array();
        std::vector<std::pair<std::uint64_t, std::uint64_t>> S;
        for (std::uint64_t L : lengths) {
            const CodedDistribution d = dist(L, cx);
            const bool exact = method == "exact" || (method == "auto" && d.atoms.size() <= kExactCoverCap);
            const CoverReport c = exact ? exact_cover_small(d, eps, mass_eps) : greedy_cover(d, eps, mass_eps);
            if (!verify_cover(d, c)) throw Error("cover failed self-verification at n = " + std::to_string(L));
            csv += s_table_row(L, c);
            json cj = cover_to_json(c);
            cj["n"] = L;
            cj["atoms"] = d.atoms.size();
            cj["accounted_mass"] = to_string(d.accounted_mass);
            covers.push_back(cj);
            S.emplace_back(L, c.S);
        }
        cx.emit("s_table.csv", csv);
        cx.emit_json("covers.json", covers);
        if (S.size() >= 2)
            cx.emit_json("entropy_profile.json",
                         entropy_profile_to_json(slow_entropy_profile(S, ScalingFunction::polynomial(), t_grid, threshold)));
    };
}

Pipeline report(Params& p, Ctx& ctx) {
    std::vector<std::pair<std::string, std::string>> runs;
    const json& r = p.raw("runs");
    if (!r.is_array() || r.empty()) throw ConfigError("params.runs must be a non-empty array of directories");
    for (const auto& x : r) {
        if (!x.is_string()) throw ConfigError("params.runs must hold strings");
        runs.emplace_back(x.get<std::string>(), ctx.path(x.get<std::string>()));
    }
    return [=](Ctx& cx) {
        json out = json::array();
        std::string csv = "run,experiment,seed,artifacts,hashes_ok\n";
        for (const auto& [name, dir] : runs) {
            const json m = json::parse(read_file((fs::path(dir) / "manifest.json").string()));
            bool ok = true;
            for (auto it = m.at("artifacts").begin(); it != m.at("artifacts").end(); ++it)
                ok = ok && sha256_file((fs::path(dir) / it.key()).string()) == it.value().get<std::string>();
            out.push_back({{"run", name}, {"experiment", m.at("experiment")}, {"seed", m.at("seed")},
                           {"version", m.at("version")}, {"artifacts", m.at("artifacts")}, {"hashes_ok", ok}});
            csv += name + "," + m.at("experiment").get<std::string>() + "," + m.at("seed").dump() + "," +
                   std::to_string(m.at("artifacts").size()) + "," + (ok ? "true" : "false") + "\n";
        }
        cx.emit_json("report.json", out);
        cx.emit("report.csv", csv);
    };
}

using Parser = Pipeline (*)(Params&, Ctx&);

const std::map<std::string, Parser>& registry() {
    static const std::map<std::string, Parser> r{
        {"sample-words", sample_words},     {"verify-words", verify_words},     {"abc-build", abc_build},
        {"abc-separation", abc_separation}, {"cutstack-build", cutstack_build}, {"cutstack-check", cutstack_check},
        {"nospacer-bench", nospacer_bench}, {"entropy", entropy},               {"report", report}};
    return r;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : registry()) v.push_back(k);
        return v;
    }();
    return names;
}

int run_experiment(const std::string& experiment, const std::string& config_path, const RunOptions& opts,
                   std::ostream& out, std::ostream& err) {
    auto fail = [&](int code, const std::string& kind, const std::string& msg) {
        err << json{{"error", {{"kind", kind}, {"experiment", experiment}, {"message", msg}}}}.dump() << "\n";
        return code;
    };
    Ctx ctx;
    ctx.experiment = experiment;
    ctx.threads = std::max(1u, opts.threads);
    Pipeline pipe;
    json config;
    fs::path out_dir;
    try {
        const auto it = registry().find(experiment);
        if (it == registry().end()) throw ConfigError("unknown experiment '" + experiment + "'");
        try {
            config = json::parse(read_file(config_path));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        ctx.config_dir = fs::path(config_path).parent_path();
        Params top(config, "config");
        if (top.has("schema") && top.u64("schema") != kConfigSchema)
            throw ConfigError("config.schema must be " + std::to_string(kConfigSchema));
        if (top.has("experiment") && top.str("experiment") != experiment)
            throw ConfigError("config.experiment is '" + config["experiment"].get<std::string>() +
                              "' but the command runs '" + experiment + "'");
        if (top.has("seed")) ctx.seed = top.u64("seed");
        if (opts.seed) ctx.seed = opts.seed;
        std::string od = top.str("output_dir", std::string("out/") + experiment);
        if (opts.out) od = *opts.out;
        out_dir = opts.out ? fs::path(od) : (fs::path(od).is_absolute() ? fs::path(od) : ctx.config_dir / od);
        Params params = top.has("params") ? top.sub("params") : Params(json::object(), "config.params");
        top.finish();
        pipe = it->second(params, ctx);
        params.finish();
    } catch (const ConfigError& e) {
        return fail(2, "config", e.what());
    } catch (const json::exception& e) {
        return fail(2, "config", e.what());
    } catch (const Error& e) {
        return fail(2, "config", e.what());
    }

    try {
        pipe(ctx);
    } catch (const ConfigError& e) {
        return fail(2, "config", e.what());
    } catch (const std::exception& e) {
        return fail(1, "pipeline", e.what());
    }

    try {
        fs::create_directories(out_dir);
        json manifest;
        manifest["tool"] = "slowent";
        manifest["version"] = kVersion;
        manifest["schema"] = kConfigSchema;
        manifest["experiment"] = experiment;
        manifest["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
        json echo = config;
        echo.erase("output_dir");
        echo["experiment"] = experiment;
        if (ctx.seed) echo["seed"] = *ctx.seed;
        manifest["config"] = echo;
        json hashes = json::object();
        for (const auto& [name, content] : ctx.artifacts) {
            std::ofstream f(out_dir / name, std::ios::binary);
            f << content;
            if (!f) throw Error("cannot write " + (out_dir / name).string());
            hashes[name] = sha256_hex(content);
        }
        manifest["artifacts"] = hashes;
        std::ofstream f(out_dir / "manifest.json", std::ios::binary);
        f << manifest.dump(2) << "\n";
        if (!f) throw Error("cannot write manifest");
    } catch (const std::exception& e) {
        return fail(1, "io", e.what());
    }
    out << experiment << ": wrote " << ctx.artifacts.size() << " artifacts to " << out_dir.string() << "\n";
    return 0;
}

}  // namespace slowent
