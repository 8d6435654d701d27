#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "epicast/policy_catalog.hpp"
#include "epicast/rng.hpp"
#include "epicast/state_names.hpp"
#include "epicast/types.hpp"

namespace epicast {

// --- civil-date helpers (proleptic Gregorian), used for weekly iso_date stamps

inline long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const long yoe = y - era * 400;
    const long doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

inline void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const long doe = z - era * 146097;
    const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const long mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yoe + era * 400 + (m <= 2 ? 1 : 0));
}

inline long parse_iso_date(const std::string& s) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31)
        fail(Errc::ParseError, "bad ISO date '" + s + "'");
    return days_from_civil(y, m, d);
}

inline std::string format_iso_date(long days) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

// ---------------------------------------------------------------------------

struct VariantSchedule {
    std::string name = "AX.1";
    int emergence_week = 10;   ///< proportions are exactly 0 before this week
    double growth = 0.35;      ///< logistic growth rate of the takeover
    double severity_boost = 6.0; ///< peak addition to the hospitalization rate
    VariantAttr infectiousness = VariantAttr::Higher;
    VariantAttr severity = VariantAttr::Comparable;
    VariantAttr immune_resistance = VariantAttr::Higher;
};

struct SyntheticConfig {
    int n_states = 20;
    int n_weeks = 80;
    std::string start_date = "2021-01-04";
    double base_rate = 7.0;       ///< per-100k baseline hospitalization rate
    double wave_amplitude = 5.0;  ///< seasonal sinusoid amplitude
    double wave_period = 30.0;    ///< weeks per seasonal cycle
    double wave_damping = 0.005;  ///< exponential damping of the seasonal term
    double noise_sd = 0.25;       ///< observation noise on the hospitalization rate
    double case_multiplier = 18.0; ///< reported cases per hospitalization (per 100k)
    double case_noise = 0.12;     ///< relative noise on weekly case counts
    std::vector<VariantSchedule> variants = {
        {"AX.1", 10, 0.35, 6.0, VariantAttr::Higher, VariantAttr::Comparable, VariantAttr::Higher},
        {"BY.2", 45, 0.40, 8.0, VariantAttr::Higher, VariantAttr::Higher, VariantAttr::Comparable},
    };
};

inline void validate_synthetic_config(const SyntheticConfig& c) {
    if (c.n_states < 2 || c.n_states > static_cast<int>(us_states().size()))
        fail(Errc::InvalidConfig, "n_states must be in [2, 50]");
    if (c.n_weeks < 20) fail(Errc::InvalidConfig, "n_weeks must be >= 20");
    if (!(c.base_rate > 0.0)) fail(Errc::InvalidConfig, "base_rate must be positive");
    if (!(c.wave_period >= 4.0)) fail(Errc::InvalidConfig, "wave_period must be >= 4");
    if (c.wave_amplitude < 0.0) fail(Errc::InvalidConfig, "wave_amplitude must be >= 0");
    if (c.noise_sd < 0.0) fail(Errc::InvalidConfig, "noise_sd must be >= 0");
    if (!(c.case_multiplier > 0.0)) fail(Errc::InvalidConfig, "case_multiplier must be positive");
    for (const auto& v : c.variants) {
        if (v.name.empty()) fail(Errc::InvalidConfig, "variant name must be nonempty");
        if (v.emergence_week < 0 || v.emergence_week >= c.n_weeks)
            fail(Errc::InvalidConfig, "variant emergence_week out of range for " + v.name);
        if (!(v.growth > 0.0)) fail(Errc::InvalidConfig, "variant growth must be positive");
        if (v.severity_boost < 0.0) fail(Errc::InvalidConfig, "variant severity_boost must be >= 0");
    }
}

namespace detail {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Smooth latent hospitalization intensity for one state at (possibly
/// fractional) week w: damped seasonal sinusoid plus one logistic takeover
/// bump per scheduled variant.
struct StateCurve {
    double base = 7.0;
    double amp = 5.0;
    double phase = 0.0;             // weeks
    std::vector<double> variant_delay; // per-variant onset delay, weeks
    std::vector<double> variant_amp;   // per-variant peak boost

    double eval(const SyntheticConfig& c, double w) const {
        double v = base + amp * std::sin(2.0 * kPi * (w + phase) / c.wave_period) *
                              std::exp(-c.wave_damping * w);
        for (std::size_t k = 0; k < c.variants.size(); ++k) {
            const auto& vs = c.variants[k];
            const double center = vs.emergence_week + variant_delay[k] + 3.0 / vs.growth;
            const double rise = logistic(vs.growth * (w - center));
            // waning after the takeover completes, so the boost is a bump
            const double wane = logistic(0.25 * (w - center - 10.0));
            v += variant_amp[k] * (rise - 0.85 * wane);
        }
        return std::max(v, 0.1);
    }

    static constexpr double kPi = 3.14159265358979323846;
};

} // namespace detail

/// Deterministic function of (config, seed); writes nothing, returns the four
/// in-memory panels. All loader invariants hold by construction.
inline PanelSet generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
    validate_synthetic_config(cfg);
    Rng rng(seed);
    const auto& roster = us_states();
    const long start_day = parse_iso_date(cfg.start_date);

    PanelSet panels;
    const int n = cfg.n_states;

    // --- spatial table: jittered demographics, seeded rank permutations
    std::vector<int> rank_cols[3];
    for (auto& col : rank_cols) {
        col.resize(static_cast<std::size_t>(n));
        std::iota(col.begin(), col.end(), 1);
        rng.shuffle(col);
    }
    for (int i = 0; i < n; ++i) {
        StateId id;
        id.code = roster[static_cast<std::size_t>(i)].first;
        id.name = roster[static_cast<std::size_t>(i)].second;
        id.population = std::round(rng.uniform(8e5, 3e7));
        SpatialProfile p;
        p.over65_share = std::round(rng.uniform(0.10, 0.22) * 100.0) / 100.0;
        p.vulnerable_race_share = std::round(rng.uniform(0.05, 0.45) * 100.0) / 100.0;
        p.health_overall_rank = rank_cols[0][static_cast<std::size_t>(i)];
        p.health_covid_rank = rank_cols[1][static_cast<std::size_t>(i)];
        p.health_access_rank = rank_cols[2][static_cast<std::size_t>(i)];
        p.party = rng.below(2) == 0 ? Party::Democrat : Party::Republican;
        p.vote_share = std::round(rng.uniform(0.50, 0.66) * 100.0) / 100.0;
        panels.states.push_back(id);
        panels.spatial.emplace(id.code, p);
    }
    std::sort(panels.states.begin(), panels.states.end(),
              [](const StateId& a, const StateId& b) { return a.code < b.code; });

    // --- per-state latent curves (drawn in roster order for stable streams)
    std::map<std::string, detail::StateCurve> curves;
    for (int i = 0; i < n; ++i) {
        detail::StateCurve c;
        c.base = rng.uniform(4.0, 10.0);
        c.amp = cfg.wave_amplitude * rng.uniform(0.7, 1.3);
        c.phase = rng.uniform(0.0, cfg.wave_period);
        for (const auto& vs : cfg.variants) {
            c.variant_delay.push_back(rng.uniform(0.0, 3.0));
            c.variant_amp.push_back(vs.severity_boost * rng.uniform(0.75, 1.25));
        }
        curves.emplace(roster[static_cast<std::size_t>(i)].first, std::move(c));
    }

    // --- epi panel
    for (const auto& id : panels.states) {
        const auto& curve = curves.at(id.code);
        StateEpiSeries series;
        series.state = id;
        series.first_week = 0;

        const double vax_cap = rng.uniform(0.55, 0.75);
        const double vax_mid = rng.uniform(14.0, 24.0);
        const double vax_scale = rng.uniform(4.0, 7.0);

        for (int w = 0; w < cfg.n_weeks; ++w) {
            series.iso_dates.push_back(format_iso_date(start_day + 7L * w));
            EpiSeriesPoint pt;
            const double lam = curve.eval(cfg, w);
            pt.hosp_rate = std::max(0.0, lam + cfg.noise_sd * rng.normal());
            const double per100k = id.population / 1e5;
            pt.cases = std::max(
                0.0, std::round(lam * cfg.case_multiplier * per100k *
                                (1.0 + cfg.case_noise * rng.normal())));
            pt.vax_partial = vax_cap * detail::logistic((w - vax_mid) / vax_scale);
            pt.vax_complete = 0.9 * vax_cap * detail::logistic((w - vax_mid - 5.0) / vax_scale);
            pt.vax_booster = 0.5 * vax_cap * detail::logistic((w - vax_mid - 16.0) / (vax_scale + 1.0));
            series.points.push_back(pt);
        }
        panels.epi.emplace(id.code, std::move(series));
    }

    // --- policy panel: stringency tracks the smoothed hospitalization rate,
    //     moving at most one level per week (hysteresis)
    for (const auto& id : panels.states) {
        const auto& pts = panels.epi.at(id.code).points;
        std::vector<PolicyLevels> levels(static_cast<std::size_t>(cfg.n_weeks));
        std::array<double, kNumPolicies> lo{}, step{};
        for (int p = 0; p < kNumPolicies; ++p) {
            lo[static_cast<std::size_t>(p)] = rng.uniform(4.0, 8.0);
            step[static_cast<std::size_t>(p)] = rng.uniform(3.0, 5.0);
        }
        PolicyLevels cur{};
        for (int w = 0; w < cfg.n_weeks; ++w) {
            double sm = 0.0;
            int cnt = 0;
            for (int k = std::max(0, w - 2); k <= w; ++k, ++cnt)
                sm += pts[static_cast<std::size_t>(k)].hosp_rate;
            sm /= cnt;
            for (int p = 0; p < kNumPolicies; ++p) {
                const int n_levels = policy_level_count(static_cast<PolicyId>(p));
                const auto pi = static_cast<std::size_t>(p);
                int target = static_cast<int>(std::floor((sm - lo[pi]) / step[pi])) + 1;
                target = std::clamp(target, 0, n_levels - 1);
                if (w == 0)
                    cur[pi] = target;
                else if (target > cur[pi])
                    ++cur[pi];
                else if (target < cur[pi])
                    --cur[pi];
            }
            levels[static_cast<std::size_t>(w)] = cur;
        }
        panels.policy.levels.emplace(id.code, std::move(levels));
    }

    // --- genomic panel (national): zero share before emergence, then a
    //     logistic takeover competing against a constant "other" background
    for (const auto& vs : cfg.variants) {
        GenomicVariantInfo info;
        info.name = vs.name;
        info.infectiousness = vs.infectiousness;
        info.severity = vs.severity;
        info.immune_resistance = vs.immune_resistance;
        panels.genomic.variants.push_back(info);
    }
    panels.genomic.proportions.assign(static_cast<std::size_t>(cfg.n_weeks),
                                      std::vector<double>(cfg.variants.size(), 0.0));
    for (int w = 0; w < cfg.n_weeks; ++w) {
        std::vector<double> raw(cfg.variants.size(), 0.0);
        for (std::size_t k = 0; k < cfg.variants.size(); ++k) {
            const auto& vs = cfg.variants[k];
            if (w < vs.emergence_week) continue; // exactly zero before emergence
            double share = 0.92 * detail::logistic(vs.growth * (w - vs.emergence_week - 8.0));
            for (std::size_t j = k + 1; j < cfg.variants.size(); ++j) {
                const auto& succ = cfg.variants[j];
                if (w >= succ.emergence_week)
                    share *= 1.0 - 0.8 * detail::logistic(succ.growth *
                                                          (w - succ.emergence_week - 8.0));
            }
            raw[k] = std::max(share, 5e-4); // survives rounding once emerged
        }
        const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
        const double scale = total > 0.97 ? 0.97 / total : 1.0;
        for (std::size_t k = 0; k < cfg.variants.size(); ++k)
            panels.genomic.proportions[static_cast<std::size_t>(w)][k] =
                std::round(raw[k] * scale * 1e4) / 1e4;
    }
    return panels;
}

} // namespace epicast
