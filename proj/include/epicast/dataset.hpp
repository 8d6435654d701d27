#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "epicast/csv.hpp"
#include "epicast/policy_catalog.hpp"
#include "epicast/state_names.hpp"
#include "epicast/targets.hpp"
#include "epicast/types.hpp"

namespace epicast {

// ---------------------------------------------------------------------------
// Loaders. Schemas (UTF-8, comma-separated, header required):
//   epi.csv:     state,week_index,iso_date,hosp_rate,cases,vax_partial,vax_complete,vax_booster
//   spatial.csv: state,population,over65_share,vulnerable_race_share,
//                health_overall_rank,health_covid_rank,health_access_rank,party,vote_share
//   policy.csv:  state,week_index,policy_id,level
//   genomic.csv: week_index,variant_name,proportion,infectiousness,severity,immune_resistance

inline EpiPanel load_epi_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_state = t.require_column("state");
    const int c_week = t.require_column("week_index");
    const int c_date = t.require_column("iso_date");
    const int c_hosp = t.require_column("hosp_rate");
    const int c_cases = t.require_column("cases");
    const int c_vp = t.require_column("vax_partial");
    const int c_vc = t.require_column("vax_complete");
    const int c_vb = t.require_column("vax_booster");

    struct Row {
        int week;
        std::string iso_date;
        EpiSeriesPoint point;
    };
    std::map<std::string, std::vector<Row>> rows_by_state;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        Row row;
        row.week = static_cast<int>(t.integer(r, c_week));
        row.iso_date = t.cell(r, c_date);
        row.point.hosp_rate = t.number(r, c_hosp);
        row.point.cases = t.number(r, c_cases);
        row.point.vax_partial = t.number(r, c_vp);
        row.point.vax_complete = t.number(r, c_vc);
        row.point.vax_booster = t.number(r, c_vb);

        const double vals[] = {row.point.hosp_rate, row.point.cases, row.point.vax_partial,
                               row.point.vax_complete, row.point.vax_booster};
        for (double v : vals) {
            if (!std::isfinite(v))
                fail(Errc::InvalidValue, "non-finite value in " + path + " row " + std::to_string(r + 2));
            if (v < 0.0)
                fail(Errc::NegativeValue, path + " row " + std::to_string(r + 2));
        }
        for (double v : {row.point.vax_partial, row.point.vax_complete, row.point.vax_booster})
            if (v > 1.0)
                fail(Errc::InvalidValue,
                     "vaccination fraction > 1 in " + path + " row " + std::to_string(r + 2));
        rows_by_state[t.cell(r, c_state)].push_back(std::move(row));
    }

    EpiPanel panel;
    for (auto& [code, rows] : rows_by_state) {
        std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.week < b.week; });
        StateEpiSeries series;
        series.state.code = code;
        series.state.name = state_display_name(code);
        series.first_week = rows.front().week;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i > 0) {
                const int gap = rows[i].week - rows[i - 1].week;
                if (gap != 1)
                    fail(Errc::NonContiguousWeeks,
                         code + " week " + std::to_string(rows[i - 1].week) + " -> " +
                             std::to_string(rows[i].week));
                const auto& prev = rows[i - 1].point;
                const auto& cur = rows[i].point;
                if (cur.vax_partial < prev.vax_partial || cur.vax_complete < prev.vax_complete ||
                    cur.vax_booster < prev.vax_booster)
                    fail(Errc::InvalidValue, "vaccination fraction decreased for " + code +
                                                 " at week " + std::to_string(rows[i].week));
            }
            series.iso_dates.push_back(rows[i].iso_date);
            series.points.push_back(rows[i].point);
        }
        panel.emplace(code, std::move(series));
    }
    return panel;
}

inline Party parse_party(const std::string& s) {
    if (s == "Democrat") return Party::Democrat;
    if (s == "Republican") return Party::Republican;
    fail(Errc::ParseError, "unknown party '" + s + "'");
}

/// Returns the spatial table plus the state roster (code, name, population).
inline std::pair<SpatialTable, std::vector<StateId>> load_spatial_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_state = t.require_column("state");
    const int c_pop = t.require_column("population");
    const int c_o65 = t.require_column("over65_share");
    const int c_vuln = t.require_column("vulnerable_race_share");
    const int c_r1 = t.require_column("health_overall_rank");
    const int c_r2 = t.require_column("health_covid_rank");
    const int c_r3 = t.require_column("health_access_rank");
    const int c_party = t.require_column("party");
    const int c_vote = t.require_column("vote_share");

    SpatialTable table;
    std::vector<StateId> states;
    const int n = static_cast<int>(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        StateId id;
        id.code = t.cell(r, c_state);
        id.name = state_display_name(id.code);
        id.population = t.number(r, c_pop);
        if (id.population <= 0.0)
            fail(Errc::InvalidValue, "population must be positive (" + id.code + ")");
        if (table.count(id.code))
            fail(Errc::InvalidValue, "duplicate state code " + id.code + " in " + path);

        SpatialProfile p;
        p.over65_share = t.number(r, c_o65);
        p.vulnerable_race_share = t.number(r, c_vuln);
        p.health_overall_rank = static_cast<int>(t.integer(r, c_r1));
        p.health_covid_rank = static_cast<int>(t.integer(r, c_r2));
        p.health_access_rank = static_cast<int>(t.integer(r, c_r3));
        p.party = parse_party(t.cell(r, c_party));
        p.vote_share = t.number(r, c_vote);
        for (double share : {p.over65_share, p.vulnerable_race_share, p.vote_share})
            if (share < 0.0 || share > 1.0)
                fail(Errc::InvalidValue, "share out of [0,1] for " + id.code);
        table.emplace(id.code, p);
        states.push_back(std::move(id));
    }

    const char* rank_names[] = {"health_overall_rank", "health_covid_rank", "health_access_rank"};
    for (int which = 0; which < 3; ++which) {
        std::set<int> seen;
        for (const auto& [code, p] : table) {
            const int rank = which == 0   ? p.health_overall_rank
                             : which == 1 ? p.health_covid_rank
                                          : p.health_access_rank;
            if (rank < 1 || rank > n || !seen.insert(rank).second)
                fail(Errc::RankNotPermutation, rank_names[which]);
        }
    }
    std::sort(states.begin(), states.end(),
              [](const StateId& a, const StateId& b) { return a.code < b.code; });
    return {std::move(table), std::move(states)};
}

inline PolicyPanel load_policy_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_state = t.require_column("state");
    const int c_week = t.require_column("week_index");
    const int c_policy = t.require_column("policy_id");
    const int c_level = t.require_column("level");

    // ragged collection first; validated and compacted below
    std::map<std::string, std::map<int, std::array<std::pair<bool, int>, kNumPolicies>>> raw;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const PolicyId pid = parse_policy_id(t.cell(r, c_policy));
        const int level = static_cast<int>(t.integer(r, c_level));
        if (level < 0 || level >= policy_level_count(pid))
            fail(Errc::UnknownPolicyLevel,
                 std::string(policy_code(pid)) + " level " + std::to_string(level));
        raw[t.cell(r, c_state)][static_cast<int>(t.integer(r, c_week))]
           [static_cast<std::size_t>(pid)] = {true, level};
    }

    PolicyPanel panel;
    for (const auto& [code, weeks] : raw) {
        if (weeks.empty()) continue;
        const int first = weeks.begin()->first;
        const int last = weeks.rbegin()->first;
        if (first != 0)
            fail(Errc::CoverageMismatch, "policy panel for " + code + " does not start at week 0");
        std::vector<PolicyLevels> levels(static_cast<std::size_t>(last + 1));
        for (int w = first; w <= last; ++w) {
            const auto it = weeks.find(w);
            if (it == weeks.end())
                fail(Errc::CoverageMismatch, "policy " + code + " week " + std::to_string(w));
            for (int p = 0; p < kNumPolicies; ++p) {
                if (!it->second[static_cast<std::size_t>(p)].first)
                    fail(Errc::CoverageMismatch, "policy " + code + " week " + std::to_string(w) +
                                                     " missing " +
                                                     policy_code(static_cast<PolicyId>(p)));
                levels[static_cast<std::size_t>(w)][static_cast<std::size_t>(p)] =
                    it->second[static_cast<std::size_t>(p)].second;
            }
        }
        panel.levels.emplace(code, std::move(levels));
    }
    return panel;
}

inline VariantAttr parse_variant_attr(const std::string& s) {
    if (s == "lower") return VariantAttr::Lower;
    if (s == "comparable") return VariantAttr::Comparable;
    if (s == "higher") return VariantAttr::Higher;
    if (s == "unknown") return VariantAttr::Unknown;
    fail(Errc::ParseError, "unknown variant attribute '" + s + "'");
}

/// National resolution; rows list named variants only. The residual share per
/// week (1 - sum of named proportions) is the implicit "other" bucket.
inline GenomicPanel load_genomic_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_week = t.require_column("week_index");
    const int c_name = t.require_column("variant_name");
    const int c_prop = t.require_column("proportion");
    const int c_inf = t.require_column("infectiousness");
    const int c_sev = t.require_column("severity");
    const int c_imm = t.require_column("immune_resistance");

    GenomicPanel panel;
    std::map<std::string, std::size_t> variant_index;
    std::map<int, std::vector<std::pair<std::size_t, double>>> by_week;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string name = t.cell(r, c_name);
        auto it = variant_index.find(name);
        if (it == variant_index.end()) {
            GenomicVariantInfo info;
            info.name = name;
            info.infectiousness = parse_variant_attr(t.cell(r, c_inf));
            info.severity = parse_variant_attr(t.cell(r, c_sev));
            info.immune_resistance = parse_variant_attr(t.cell(r, c_imm));
            it = variant_index.emplace(name, panel.variants.size()).first;
            panel.variants.push_back(std::move(info));
        }
        const double prop = t.number(r, c_prop);
        if (prop < 0.0 || prop > 1.0)
            fail(Errc::InvalidValue, "proportion out of [0,1] in " + path + " row " + std::to_string(r + 2));
        by_week[static_cast<int>(t.integer(r, c_week))].emplace_back(it->second, prop);
    }
    if (by_week.empty()) fail(Errc::ParseError, "no rows in " + path);
    const int last_week = by_week.rbegin()->first;
    if (by_week.begin()->first != 0)
        fail(Errc::CoverageMismatch, "genomic panel does not start at week 0");
    panel.proportions.assign(static_cast<std::size_t>(last_week + 1),
                             std::vector<double>(panel.variants.size(), 0.0));
    for (int w = 0; w <= last_week; ++w) {
        const auto it = by_week.find(w);
        if (it == by_week.end())
            fail(Errc::CoverageMismatch, "genomic week " + std::to_string(w));
        double total = 0.0;
        for (const auto& [vi, prop] : it->second) {
            panel.proportions[static_cast<std::size_t>(w)][vi] = prop;
            total += prop;
        }
        if (total > 1.0 + 1e-6)
            fail(Errc::ProportionSumViolation, "week " + std::to_string(w));
    }
    return panel;
}

// ---------------------------------------------------------------------------
// Writers (inverse of the loaders; used by the synthetic generator and the
// round-trip tests).

inline void write_epi_csv(const std::string& path, const EpiPanel& panel) {
    CsvWriter w(path);
    w.row({"state", "week_index", "iso_date", "hosp_rate", "cases", "vax_partial", "vax_complete",
           "vax_booster"});
    for (const auto& [code, series] : panel)
        for (int i = 0; i < series.n_weeks(); ++i) {
            const auto& p = series.points[static_cast<std::size_t>(i)];
            w.row({code, std::to_string(series.first_week + i),
                   series.iso_dates[static_cast<std::size_t>(i)], format_double(p.hosp_rate),
                   format_double(p.cases), format_double(p.vax_partial),
                   format_double(p.vax_complete), format_double(p.vax_booster)});
        }
}

inline void write_spatial_csv(const std::string& path, const std::vector<StateId>& states,
                              const SpatialTable& table) {
    CsvWriter w(path);
    w.row({"state", "population", "over65_share", "vulnerable_race_share", "health_overall_rank",
           "health_covid_rank", "health_access_rank", "party", "vote_share"});
    for (const auto& id : states) {
        const auto& p = table.at(id.code);
        w.row({id.code, format_double(id.population), format_double(p.over65_share),
               format_double(p.vulnerable_race_share), std::to_string(p.health_overall_rank),
               std::to_string(p.health_covid_rank), std::to_string(p.health_access_rank),
               party_name(p.party), format_double(p.vote_share)});
    }
}

inline void write_policy_csv(const std::string& path, const PolicyPanel& panel) {
    CsvWriter w(path);
    w.row({"state", "week_index", "policy_id", "level"});
    for (const auto& [code, weeks] : panel.levels)
        for (std::size_t week = 0; week < weeks.size(); ++week)
            for (int p = 0; p < kNumPolicies; ++p)
                w.row({code, std::to_string(week), policy_code(static_cast<PolicyId>(p)),
                       std::to_string(weeks[week][static_cast<std::size_t>(p)])});
}

inline void write_genomic_csv(const std::string& path, const GenomicPanel& panel) {
    CsvWriter w(path);
    w.row({"week_index", "variant_name", "proportion", "infectiousness", "severity",
           "immune_resistance"});
    for (std::size_t week = 0; week < panel.proportions.size(); ++week)
        for (std::size_t v = 0; v < panel.variants.size(); ++v) {
            const auto& info = panel.variants[v];
            w.row({std::to_string(week), info.name, format_double(panel.proportions[week][v]),
                   variant_attr_name(info.infectiousness), variant_attr_name(info.severity),
                   variant_attr_name(info.immune_resistance)});
        }
}

// ---------------------------------------------------------------------------

inline PanelSet load_panels(const std::string& dir) {
    PanelSet panels;
    panels.epi = load_epi_csv(dir + "/epi.csv");
    auto [spatial, states] = load_spatial_csv(dir + "/spatial.csv");
    panels.spatial = std::move(spatial);
    panels.states = std::move(states);
    panels.policy = load_policy_csv(dir + "/policy.csv");
    panels.genomic = load_genomic_csv(dir + "/genomic.csv");
    return panels;
}

inline void write_panels(const std::string& dir, const PanelSet& panels) {
    write_epi_csv(dir + "/epi.csv", panels.epi);
    write_spatial_csv(dir + "/spatial.csv", panels.states, panels.spatial);
    write_policy_csv(dir + "/policy.csv", panels.policy);
    write_genomic_csv(dir + "/genomic.csv", panels.genomic);
}

/// Joins the four panels into one DataRecord per (state, week) with
/// week index >= window_len - 1. The epi history window is the trailing
/// window_len weeks ending at the record's week.
inline Dataset assemble_dataset(PanelSet panels, int window_len) {
    if (window_len < 4)
        fail(Errc::InvalidConfig, "window_len must be >= 4, got " + std::to_string(window_len));

    Dataset ds;
    ds.window_len = window_len;

    // Shared (state, week) grid, defined by the epi panel.
    int n_weeks = -1;
    for (const auto& [code, series] : panels.epi) {
        if (series.first_week != 0)
            fail(Errc::CoverageMismatch, code + " epi series does not start at week 0");
        if (n_weeks < 0)
            n_weeks = series.n_weeks();
        else if (series.n_weeks() != n_weeks)
            fail(Errc::CoverageMismatch, code + " week " + std::to_string(std::min(n_weeks, series.n_weeks())));
    }
    if (n_weeks <= 0) fail(Errc::EmptyInput, "epi panel has no states");

    for (const auto& id : panels.states)
        if (!panels.epi.count(id.code))
            fail(Errc::CoverageMismatch, "state " + id.code + " missing from epi panel");
    for (const auto& [code, series] : panels.epi) {
        if (!panels.spatial.count(code))
            fail(Errc::CoverageMismatch, "state " + code + " missing from spatial table");
        const auto pit = panels.policy.levels.find(code);
        if (pit == panels.policy.levels.end())
            fail(Errc::CoverageMismatch, "state " + code + " missing from policy panel");
        if (static_cast<int>(pit->second.size()) < n_weeks)
            fail(Errc::CoverageMismatch,
                 "policy " + code + " week " + std::to_string(pit->second.size()));
    }
    if (panels.genomic.n_weeks() < n_weeks)
        fail(Errc::CoverageMismatch, "genomic week " + std::to_string(panels.genomic.n_weeks()));

    for (const auto& id : panels.states) {
        const auto& series = panels.epi.at(id.code);
        const auto& policy_weeks = panels.policy.levels.at(id.code);
        std::vector<double> cases(series.points.size());
        for (std::size_t i = 0; i < cases.size(); ++i) cases[i] = series.points[i].cases;
        for (int t = window_len - 1; t < n_weeks; ++t) {
            DataRecord rec;
            rec.state = id;
            rec.n_states = static_cast<int>(panels.states.size());
            rec.week.index = t;
            rec.week.iso_date = series.iso_dates[static_cast<std::size_t>(t)];
            rec.epi_window.assign(series.points.begin() + (t - window_len + 1),
                                  series.points.begin() + (t + 1));
            rec.spatial = panels.spatial.at(id.code);
            rec.policy_now = policy_weeks[static_cast<std::size_t>(t)];
            rec.has_prev_policy = t > 0;
            rec.policy_prev = rec.has_prev_policy ? policy_weeks[static_cast<std::size_t>(t - 1)]
                                                  : rec.policy_now;
            rec.prev_infections =
                t >= 16 ? previous_infections(cases, id.population, t) : -1.0;
            for (std::size_t v = 0; v < panels.genomic.variants.size(); ++v) {
                GenomicVariantWindow gw;
                gw.info = panels.genomic.variants[v];
                for (int wk = t - window_len + 1; wk <= t; ++wk)
                    gw.shares.push_back(panels.genomic.proportions[static_cast<std::size_t>(wk)][v]);
                rec.genomic.push_back(std::move(gw));
            }
            ds.records.push_back(std::move(rec));
        }
    }
    ds.panels = std::move(panels);
    return ds;
}

} // namespace epicast
