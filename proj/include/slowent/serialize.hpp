#pragma once

#include "slowent/abc.hpp"
#include "slowent/cutstack.hpp"
#include "slowent/entropy.hpp"
#include "slowent/sampler.hpp"

#include <json.hpp>

namespace slowent {

using json = nlohmann::json;

json growth_to_json(const GrowthSequence& g);
GrowthSequence growth_from_json(const json& j);

json params_to_json(const SamplerParams& p);
SamplerParams params_from_json(const json& j);

json report_to_json(const VerificationReport& r);
VerificationReport report_from_json(const json& j);

json collection_to_json(const WordCollection& c);  // everything but the words themselves

json cover_to_json(const CoverReport& c);
CoverReport cover_from_json(const json& j);

json entropy_profile_to_json(const EntropyProfile& p);
EntropyProfile entropy_profile_from_json(const json& j);

json separation_to_json(const SeparationStats& s);
json safe_domain_to_json(const SafeDomainBound& b);
json clauses_to_json(const std::vector<ClauseCheck>& c);

json lemma_to_json(const LemmaReport& r);
json mass_to_json(const MassReport& r);
json nospacer_to_json(const NoSpacerResult& r);

// n, eps, S, covered_mass, method
std::string s_table_header();
std::string s_table_row(std::uint64_t n, const CoverReport& c);

}  // namespace slowent
