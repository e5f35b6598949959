#include "slowent/serialize.hpp"

#include <set>
#include <sstream>

namespace slowent {

namespace {

json rat(const Rational& r) { return to_string(r); }
Rational rat_of(const json& j) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (!j.is_string()) throw Error("expected a rational as \"p/q\" string or integer");
    return parse_rational(j.get<std::string>());
}
BigInt big_of(const json& j) {
    if (j.is_number_integer()) return BigInt(j.get<std::int64_t>());
    if (!j.is_string()) throw Error("expected an integer or decimal string");
    return parse_bigint(j.get<std::string>());
}

json witness_to_json(const Witness& w) {
    return {{"w", w.w}, {"w2", w.w2}, {"t", w.t}, {"start", w.start}, {"length", w.length}};
}
Witness witness_from_json(const json& j) {
    return {j.at("w"), j.at("w2"), j.at("t"), j.at("start"), j.at("length")};
}

json sep_to_json(const SeparationResult& s) {
    return {{"vacuous", s.vacuous}, {"evaluated", s.evaluated}, {"aborted", s.aborted},
            {"min_distance", rat(s.min_distance)}, {"witness", witness_to_json(s.witness)},
            {"threshold", rat(s.threshold)}, {"ok", s.ok()}};
}
SeparationResult sep_from_json(const json& j) {
    SeparationResult s;
    s.vacuous = j.at("vacuous");
    s.evaluated = j.at("evaluated");
    s.aborted = j.at("aborted");
    s.min_distance = rat_of(j.at("min_distance"));
    s.witness = witness_from_json(j.at("witness"));
    s.threshold = rat_of(j.at("threshold"));
    return s;
}

json short_to_json(const ShortResult& s) {
    return {{"vacuous", s.vacuous}, {"evaluated", s.evaluated}, {"worst_proportion", rat(s.worst_proportion)},
            {"worst_scaled", s.worst_scaled}, {"close", s.close}, {"total", s.total},
            {"witness", witness_to_json(s.witness)}, {"ok", s.ok()}};
}
ShortResult short_from_json(const json& j) {
    ShortResult s;
    s.vacuous = j.at("vacuous");
    s.evaluated = j.at("evaluated");
    s.worst_proportion = rat_of(j.at("worst_proportion"));
    s.worst_scaled = j.at("worst_scaled");
    s.close = j.at("close");
    s.total = j.at("total");
    s.witness = witness_from_json(j.at("witness"));
    return s;
}

json words_json(const std::vector<Word>& ws) {
    json a = json::array();
    for (const auto& w : ws) a.push_back(w);
    return a;
}

}  // namespace

json growth_to_json(const GrowthSequence& g) {
    if (g.kind == GrowthSequence::Kind::table) {
        json v = json::array();
        for (const auto& x : g.table) v.push_back(rat(x));
        return {{"kind", "table"}, {"values", v}};
    }
    return {{"kind", "polynomial"}, {"exponent", rat(g.exponent)}, {"coef", rat(g.coef)},
            {"mult", to_string(g.mult)}, {"offset", to_string(g.offset)}};
}

GrowthSequence growth_from_json(const json& j) {
    if (!j.is_object()) throw Error("growth sequence must be an object");
    const std::string kind = j.value("kind", std::string("polynomial"));
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const std::set<std::string> poly{"kind", "exponent", "coef", "mult", "offset"};
        if (kind == "table" ? (it.key() != "kind" && it.key() != "values") : !poly.count(it.key()))
            throw Error("unknown growth key: " + it.key());
    }
    GrowthSequence g;
    if (kind == "table") {
        std::vector<Rational> v;
        for (const auto& x : j.at("values")) v.push_back(rat_of(x));
        return GrowthSequence::from_table(std::move(v));
    }
    if (kind != "polynomial") throw Error("growth kind must be polynomial or table");
    g.exponent = j.contains("exponent") ? rat_of(j["exponent"]) : Rational(1);
    g.coef = j.contains("coef") ? rat_of(j["coef"]) : Rational(1);
    g.mult = j.contains("mult") ? big_of(j["mult"]) : BigInt(1);
    g.offset = j.contains("offset") ? big_of(j["offset"]) : BigInt(0);
    g.validate();
    return g;
}

json params_to_json(const SamplerParams& p) {
    json j{{"sigma", p.sigma}, {"k", p.k}, {"N", p.N}, {"eps", rat(p.eps)}, {"gamma", rat(p.gamma)},
           {"b", growth_to_json(p.b)}};
    if (p.sigma_budget) j["sigma_budget"] = rat(*p.sigma_budget);
    return j;
}

SamplerParams params_from_json(const json& j) {
    SamplerParams p;
    p.sigma = j.at("sigma");
    p.k = j.at("k");
    p.N = j.at("N");
    p.eps = rat_of(j.at("eps"));
    p.gamma = rat_of(j.at("gamma"));
    p.b = growth_from_json(j.at("b"));
    if (j.contains("sigma_budget")) p.sigma_budget = rat_of(j["sigma_budget"]);
    return p;
}

json report_to_json(const VerificationReport& r) {
    json j{{"uniformity_ok", r.uniformity_ok},
           {"distinct_ok", r.distinct_ok},
           {"substantial", sep_to_json(r.substantial)},
           {"intermediate", sep_to_json(r.intermediate)},
           {"short_eps", short_to_json(r.short_eps)},
           {"short_2eps", short_to_json(r.short_2eps)},
           {"mode", r.mode},
           {"samples", r.samples},
           {"sample_seed", r.sample_seed},
           {"passed", r.passed()}};
    j["uniformity_witness"] = r.uniformity_witness ? json(*r.uniformity_witness) : json(nullptr);
    return j;
}

VerificationReport report_from_json(const json& j) {
    VerificationReport r;
    r.uniformity_ok = j.at("uniformity_ok");
    r.distinct_ok = j.at("distinct_ok");
    if (!j.at("uniformity_witness").is_null()) r.uniformity_witness = j["uniformity_witness"].get<std::size_t>();
    r.substantial = sep_from_json(j.at("substantial"));
    r.intermediate = sep_from_json(j.at("intermediate"));
    r.short_eps = short_from_json(j.at("short_eps"));
    r.short_2eps = short_from_json(j.at("short_2eps"));
    r.mode = j.at("mode");
    r.samples = j.at("samples");
    r.sample_seed = j.at("sample_seed");
    return r;
}

json collection_to_json(const WordCollection& c) {
    return {{"params", params_to_json(c.params)}, {"tau", c.tau}, {"beta", c.beta},
            {"tau_source", c.tau_source}, {"beta_source", c.beta_source}, {"attempts", c.attempts},
            {"seed", c.seed}, {"report", report_to_json(c.report)}};
}

json cover_to_json(const CoverReport& c) {
    return {{"eps", rat(c.eps)}, {"mass_eps", rat(c.mass_eps)}, {"S", c.S}, {"centers", words_json(c.centers)},
            {"covered_mass", rat(c.covered_mass)}, {"method", c.method}};
}

CoverReport cover_from_json(const json& j) {
    CoverReport c;
    c.eps = rat_of(j.at("eps"));
    c.mass_eps = rat_of(j.at("mass_eps"));
    c.S = j.at("S");
    for (const auto& w : j.at("centers")) c.centers.push_back(w.get<Word>());
    c.covered_mass = rat_of(j.at("covered_mass"));
    c.method = j.at("method");
    return c;
}

json entropy_profile_to_json(const EntropyProfile& p) {
    json rows = json::array();
    for (const auto& r : p.rows) rows.push_back({{"t", rat(r.t)}, {"min_ratio", r.min_ratio}, {"max_ratio", r.max_ratio}});
    return {{"scale", p.scale}, {"rows", rows}, {"t_estimate", rat(p.t_estimate)}, {"threshold", p.threshold},
            {"label", p.label}};
}

EntropyProfile entropy_profile_from_json(const json& j) {
    EntropyProfile p;
    p.scale = j.at("scale");
    for (const auto& r : j.at("rows")) p.rows.push_back({rat_of(r.at("t")), r.at("min_ratio"), r.at("max_ratio")});
    p.t_estimate = rat_of(j.at("t_estimate"));
    p.threshold = j.at("threshold");
    p.label = j.at("label");
    return p;
}

json separation_to_json(const SeparationStats& s) {
    json j{{"min_distance", rat(s.min_distance)}, {"mean_distance", s.mean_distance},
           {"witness", {{"i", s.i}, {"j", s.j}, {"t", s.t}}}, {"pairs_checked", s.pairs_checked},
           {"distinct_names", s.distinct_names}};
    j["min_t0"] = s.min_t0 ? rat(*s.min_t0) : json(nullptr);
    j["certified_radius"] = s.certified_radius ? rat(*s.certified_radius) : json(nullptr);
    return j;
}

json safe_domain_to_json(const SafeDomainBound& b) {
    json st = json::array();
    for (const auto& [m, v] : b.single_stage) st.push_back({{"m", m}, {"bound", rat(v)}});
    return {{"n", b.n}, {"horizon", b.horizon}, {"measure_lower_bound", rat(b.measure_lower_bound)},
            {"single_stage", st}};
}

json clauses_to_json(const std::vector<ClauseCheck>& c) {
    json a = json::array();
    for (const auto& x : c) a.push_back({{"stage", x.stage}, {"clause", x.clause}, {"ok", x.ok}});
    return a;
}

json lemma_to_json(const LemmaReport& r) {
    json pairs = json::array();
    for (const auto& p : r.pairs)
        pairs.push_back({{"i", p.i}, {"j", p.j}, {"distance", rat(p.distance)}, {"bound", p.bound},
                         {"ok", p.ok}, {"first_realignment", to_string(p.first_realignment)}});
    auto opt = [](const std::optional<Rational>& x) { return x ? rat(*x) : json(nullptr); };
    return {{"n_eff", r.n_eff ? json(*r.n_eff) : json(nullptr)},
            {"certified", r.certified},
            {"notes", r.notes},
            {"alpha", opt(r.alpha)},
            {"alpha_t", r.alpha_t},
            {"t_max", r.t_max},
            {"alpha_exhaustive", r.alpha_exhaustive},
            {"pairs", pairs},
            {"all_pairs_ok", r.all_pairs_ok},
            {"ineq1_min", opt(r.ineq1_min)},
            {"ineq2_min", opt(r.ineq2_min)},
            {"ineq3_min", opt(r.ineq3_min)},
            {"product_1600", r.product_1600},
            {"product_600", r.product_600}};
}

json mass_to_json(const MassReport& r) {
    json e = json::array();
    for (const auto& x : r.entries)
        e.push_back({{"n", x.n}, {"spacer_added", rat(x.spacer_added)}, {"total_after", rat(x.total_after)},
                     {"ratio", rat(x.ratio)}, {"ratio_in_bounds", x.ratio_in_bounds},
                     {"exchange_ok", x.exchange_ok}, {"spacer_bound_ok", x.spacer_bound_ok}});
    return {{"entries", e},
            {"initial_total", rat(r.initial_total)},
            {"current_total", rat(r.current_total)},
            {"ledger_total", rat(r.ledger_total)},
            {"conserved", r.conserved},
            {"ratio", rat(r.ratio)},
            {"ratio_in_bounds", r.ratio_in_bounds},
            {"total_bound", r.total_bound},
            {"asserted", r.asserted}};
}

json nospacer_to_json(const NoSpacerResult& r) {
    json towers = json::array();
    for (const auto& t : r.towers) towers.push_back({{"width", rat(t.width)}, {"height", t.coding.size()}});
    return {{"towers", towers}, {"L", r.L}, {"atoms", r.atoms}, {"cover", cover_to_json(r.cover)},
            {"bound", r.bound}, {"ok", r.ok}};
}

std::string s_table_header() { return "n,eps,S,covered_mass,method\n"; }

std::string s_table_row(std::uint64_t n, const CoverReport& c) {
    std::ostringstream os;
    os << n << ',' << to_string(c.eps) << ',' << c.S << ',' << to_string(c.covered_mass) << ',' << c.method << '\n';
    return os.str();
}

}  // namespace slowent
