#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "epicast/common.hpp"

namespace epicast {

struct StateId {
    std::string code; // two-letter region code, unique within a dataset
    std::string name;
    double population = 0.0; // persons, strictly positive
};

struct WeekIndex {
    int index = 0;        // 0-based week ordinal from dataset start
    std::string iso_date; // first day of the epidemiological week
};

struct EpiSeriesPoint {
    double hosp_rate = 0.0; // hospitalizations per 100k persons
    double cases = 0.0;     // reported cases count
    double vax_partial = 0.0;
    double vax_complete = 0.0;
    double vax_booster = 0.0;
};

enum class Party { Democrat, Republican };

inline const char* party_name(Party p) { return p == Party::Democrat ? "Democrat" : "Republican"; }

struct SpatialProfile {
    double over65_share = 0.0;
    double vulnerable_race_share = 0.0;
    int health_overall_rank = 0; // 1..N_states, permutation across the dataset
    int health_covid_rank = 0;
    int health_access_rank = 0;
    Party party = Party::Democrat;
    double vote_share = 0.0;
};

enum class PolicyId { C1, C2, C3, C4, H8 };

inline constexpr int kNumPolicies = 5;

inline const char* policy_code(PolicyId p) {
    switch (p) {
    case PolicyId::C1: return "C1";
    case PolicyId::C2: return "C2";
    case PolicyId::C3: return "C3";
    case PolicyId::C4: return "C4";
    case PolicyId::H8: return "H8";
    }
    return "?";
}

struct PolicyRecord {
    PolicyId policy_id = PolicyId::C1;
    int level = 0; // 0-based index into that policy's stringency level list
};

/// Levels for all five policies of one state in one week, indexed by PolicyId.
using PolicyLevels = std::array<int, kNumPolicies>;

enum class VariantAttr { Lower, Comparable, Higher, Unknown };

inline const char* variant_attr_name(VariantAttr a) {
    switch (a) {
    case VariantAttr::Lower: return "lower";
    case VariantAttr::Comparable: return "comparable";
    case VariantAttr::Higher: return "higher";
    case VariantAttr::Unknown: return "unknown";
    }
    return "?";
}

struct GenomicVariantInfo {
    std::string name;
    VariantAttr infectiousness = VariantAttr::Unknown;
    VariantAttr severity = VariantAttr::Unknown;
    VariantAttr immune_resistance = VariantAttr::Unknown;
};

/// One tracked variant with its weekly share trajectory over a record's window.
struct GenomicVariantWindow {
    GenomicVariantInfo info;
    std::vector<double> shares; // aligned with the record's epi window weeks
};

/// One (state, week) joined observation across all four modalities.
struct DataRecord {
    StateId state;
    WeekIndex week;
    std::vector<EpiSeriesPoint> epi_window; // trailing window ending at `week`, no gaps
    SpatialProfile spatial;
    PolicyLevels policy_now{};
    PolicyLevels policy_prev{};
    bool has_prev_policy = false; // false only at week 0
    std::vector<GenomicVariantWindow> genomic;
    bool include_genomic = true; // w/o-GSI experiment toggle
    int n_states = 50;           // roster size, used to scale rank partitions
    double prev_infections = -1.0; // cumulative reported infection fraction,
                                   // or -1 when the week lacks 16-week history
};

// ---------------------------------------------------------------------------
// Panels: validated per-modality tables keyed by state (and week).

struct StateEpiSeries {
    StateId state;
    int first_week = 0; // weeks are contiguous from first_week
    std::vector<std::string> iso_dates;
    std::vector<EpiSeriesPoint> points;

    int n_weeks() const { return static_cast<int>(points.size()); }
    const EpiSeriesPoint& at_week(int w) const { return points.at(static_cast<std::size_t>(w - first_week)); }
};

using EpiPanel = std::map<std::string, StateEpiSeries>;

using SpatialTable = std::map<std::string, SpatialProfile>;

struct PolicyPanel {
    // levels[state][week][policy]
    std::map<std::string, std::vector<PolicyLevels>> levels;
};

/// National-resolution weekly variant shares, broadcast to every state.
struct GenomicPanel {
    std::vector<GenomicVariantInfo> variants;
    std::vector<std::vector<double>> proportions; // [week][variant], named variants only
    int n_weeks() const { return static_cast<int>(proportions.size()); }
};

struct PanelSet {
    std::vector<StateId> states; // sorted by code
    EpiPanel epi;
    SpatialTable spatial;
    PolicyPanel policy;
    GenomicPanel genomic;
};

/// Assembled dataset: panels plus the per-(state, week) record sequence.
struct Dataset {
    PanelSet panels;
    int window_len = 12;
    std::vector<DataRecord> records; // ordered by (state code, week index)

    /// Index into records for (state, issue week), or -1 when the week predates
    /// the first full window. Relies on the uniform per-state grid that
    /// assemble_dataset enforces.
    int record_index(const std::string& code, int week) const {
        if (week < window_len - 1) return -1;
        auto it = std::lower_bound(panels.states.begin(), panels.states.end(), code,
                                   [](const StateId& s, const std::string& c) { return s.code < c; });
        if (it == panels.states.end() || it->code != code)
            fail(Errc::IdOutOfRange, "unknown state " + code);
        const int n_weeks = panels.epi.at(code).n_weeks();
        if (week >= n_weeks) return -1;
        const int per_state = n_weeks - (window_len - 1);
        const auto state_pos = static_cast<int>(it - panels.states.begin());
        return state_pos * per_state + (week - (window_len - 1));
    }
};

} // namespace epicast
