#pragma once

#include <array>
#include <string>
#include <utility>

namespace epicast {

/// The 50 U.S. state postal codes with display names, in alphabetical code
/// order. Synthetic scenarios with up to 50 states reuse these codes so that
/// generated files and prompts read naturally.
inline const std::array<std::pair<const char*, const char*>, 50>& us_states() {
    static const std::array<std::pair<const char*, const char*>, 50> table = {{
        {"AK", "Alaska"},       {"AL", "Alabama"},        {"AR", "Arkansas"},
        {"AZ", "Arizona"},      {"CA", "California"},     {"CO", "Colorado"},
        {"CT", "Connecticut"},  {"DE", "Delaware"},       {"FL", "Florida"},
        {"GA", "Georgia"},      {"HI", "Hawaii"},         {"IA", "Iowa"},
        {"ID", "Idaho"},        {"IL", "Illinois"},       {"IN", "Indiana"},
        {"KS", "Kansas"},       {"KY", "Kentucky"},       {"LA", "Louisiana"},
        {"MA", "Massachusetts"},{"MD", "Maryland"},       {"ME", "Maine"},
        {"MI", "Michigan"},     {"MN", "Minnesota"},      {"MO", "Missouri"},
        {"MS", "Mississippi"},  {"MT", "Montana"},        {"NC", "North Carolina"},
        {"ND", "North Dakota"}, {"NE", "Nebraska"},       {"NH", "New Hampshire"},
        {"NJ", "New Jersey"},   {"NM", "New Mexico"},     {"NV", "Nevada"},
        {"NY", "New York"},     {"OH", "Ohio"},           {"OK", "Oklahoma"},
        {"OR", "Oregon"},       {"PA", "Pennsylvania"},   {"RI", "Rhode Island"},
        {"SC", "South Carolina"},{"SD", "South Dakota"},  {"TN", "Tennessee"},
        {"TX", "Texas"},        {"UT", "Utah"},           {"VA", "Virginia"},
        {"VT", "Vermont"},      {"WA", "Washington"},     {"WI", "Wisconsin"},
        {"WV", "West Virginia"},{"WY", "Wyoming"},
    }};
    return table;
}

inline std::string state_display_name(const std::string& code) {
    for (const auto& [c, n] : us_states())
        if (code == c) return n;
    return code;
}

} // namespace epicast
