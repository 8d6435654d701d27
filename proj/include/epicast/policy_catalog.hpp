#pragma once

#include <string>
#include <vector>

#include "epicast/common.hpp"
#include "epicast/types.hpp"

namespace epicast {

/// Catalog of the five containment/closure and health-system policies with
/// their ordered stringency level summaries. Level index 0 is always the
/// least stringent.
struct PolicyCatalogEntry {
    PolicyId id;
    std::string prompt_name; // how the policy is referred to in prompt text
    std::vector<std::string> level_summaries;
};

inline const std::vector<PolicyCatalogEntry>& policy_catalog() {
    static const std::vector<PolicyCatalogEntry> catalog = {
        {PolicyId::C1,
         "school policy",
         {"no measures", "recommend closing", "require closing at some levels",
          "require closing at all levels"}},
        {PolicyId::C2,
         "workplace policy",
         {"no measures", "recommend closing", "require closing for some categories",
          "require closing for all but essential workplaces"}},
        {PolicyId::C3, "public events policy", {"no measures", "recommend canceling", "required canceling"}},
        {PolicyId::C4,
         "gathering policy",
         {"no measures", "restrictions on very large gatherings",
          "restrictions on gatherings between 101-1000 people",
          "restrictions on gatherings between 11-100 people",
          "restrictions on gatherings of 10 people or less"}},
        {PolicyId::H8,
         "elderly protection policy",
         {"no measures", "recommended isolation and visitor restriction",
          "narrow restrictions for isolation and some limitations on external visitors",
          "extensive restrictions for isolation and all non-essential external visitors prohibited"}},
    };
    return catalog;
}

inline const PolicyCatalogEntry& policy_entry(PolicyId id) {
    return policy_catalog().at(static_cast<std::size_t>(id));
}

inline int policy_level_count(PolicyId id) {
    return static_cast<int>(policy_entry(id).level_summaries.size());
}

inline const std::string& policy_level_summary(PolicyId id, int level) {
    const auto& entry = policy_entry(id);
    if (level < 0 || level >= static_cast<int>(entry.level_summaries.size()))
        fail(Errc::UnknownPolicyLevel,
             std::string(policy_code(id)) + " level " + std::to_string(level));
    return entry.level_summaries[static_cast<std::size_t>(level)];
}

inline PolicyId parse_policy_id(const std::string& code) {
    for (const auto& e : policy_catalog())
        if (code == policy_code(e.id)) return e.id;
    fail(Errc::ParseError, "unknown policy id '" + code + "'");
}

} // namespace epicast
