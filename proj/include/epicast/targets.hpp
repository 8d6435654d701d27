#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "epicast/csv.hpp"
#include "epicast/types.hpp"

namespace epicast {

inline constexpr int kNumClasses = 5;

enum class Horizon { OneWeek = 1, ThreeWeek = 3 };

inline Horizon horizon_from_int(int h) {
    if (h == 1) return Horizon::OneWeek;
    if (h == 3) return Horizon::ThreeWeek;
    fail(Errc::InvalidConfig, "horizon must be 1 or 3, got " + std::to_string(h));
}

inline int horizon_weeks(Horizon h) { return static_cast<int>(h); }

struct TrendValue {
    double value = 0.0;
    Horizon horizon = Horizon::OneWeek;
};

/// Ordinal trend category. 1 = Substantial Decrease ... 5 = Substantial Increase.
struct HtcClass {
    int ordinal = 3;
    bool operator==(const HtcClass& o) const { return ordinal == o.ordinal; }
};

inline const char* htc_label(int ordinal) {
    switch (ordinal) {
        case 1: return "Substantial Decrease";
        case 2: return "Moderate Decrease";
        case 3: return "Stable";
        case 4: return "Moderate Increase";
        case 5: return "Substantial Increase";
    }
    fail(Errc::InvalidValue, "class ordinal out of 1..5: " + std::to_string(ordinal));
}

inline const char* htc_label(HtcClass c) { return htc_label(c.ordinal); }

/// Class-token spelling used in prompts and the vocabulary, e.g.
/// "<Substantial Decrease>".
inline std::string class_token(int ordinal) {
    return std::string("<") + htc_label(ordinal) + ">";
}

inline std::string class_token(HtcClass c) { return class_token(c.ordinal); }

/// Trailing 3-week mean of the hospitalization rate ending at week t.
inline double smoothed_hr(const std::vector<double>& hr, int t) {
    if (t < 2) fail(Errc::InsufficientHistory, "smoothed_hr needs t >= 2, got t=" + std::to_string(t));
    if (t >= static_cast<int>(hr.size()))
        fail(Errc::FutureUnavailable, "smoothed_hr at t=" + std::to_string(t));
    return (hr[static_cast<std::size_t>(t - 2)] + hr[static_cast<std::size_t>(t - 1)] +
            hr[static_cast<std::size_t>(t)]) /
           3.0;
}

/// Realized trend for a forecast issued at week t: HR at t+h minus the
/// smoothed baseline at issue time.
inline TrendValue hosp_trend(const std::vector<double>& hr, int t, Horizon h) {
    const int target_week = t + horizon_weeks(h);
    if (target_week >= static_cast<int>(hr.size()))
        fail(Errc::FutureUnavailable, "HR(t+h) with t=" + std::to_string(t));
    return {hr[static_cast<std::size_t>(target_week)] - smoothed_hr(hr, t), h};
}

/// Category thresholds per horizon: inner band half-width and outer threshold.
inline std::pair<double, double> htc_thresholds(Horizon h) {
    return h == Horizon::OneWeek ? std::pair{1.0, 3.0} : std::pair{1.5, 4.5};
}

/// Exact threshold values go to the less extreme category on both sides, so
/// Stable covers [-a, a], the moderate bands (a, b] and [-b, -a), and the
/// substantial tails the strict remainders.
inline HtcClass categorize(TrendValue ht) {
    if (!std::isfinite(ht.value)) fail(Errc::InvalidValue, "non-finite trend value");
    const auto [a, b] = htc_thresholds(ht.horizon);
    if (ht.value > b) return {5};
    if (ht.value > a) return {4};
    if (ht.value >= -a) return {3};
    if (ht.value >= -b) return {2};
    return {1};
}

/// Cumulative reported infection fraction: cases summed over weeks t-16..t-4
/// divided by population.
inline double previous_infections(const std::vector<double>& cases, double pop, int t) {
    if (pop <= 0.0) fail(Errc::InvalidValue, "population must be positive");
    if (t < 16)
        fail(Errc::InsufficientHistory, "previous_infections needs t >= 16, got t=" + std::to_string(t));
    if (t >= static_cast<int>(cases.size()))
        fail(Errc::FutureUnavailable, "previous_infections at t=" + std::to_string(t));
    double total = 0.0;
    for (int j = t - 16; j <= t - 4; ++j) total += cases[static_cast<std::size_t>(j)];
    return total / pop;
}

/// Backward-looking trend feature at week w: HR(w) minus the smoothed baseline
/// one week earlier (defined for w >= 3; zero before that).
inline double backward_trend(const std::vector<double>& hr, int w) {
    if (w < 3) return 0.0;
    return hr[static_cast<std::size_t>(w)] - smoothed_hr(hr, w - 1);
}

struct LabeledExample {
    std::string state;
    int week = 0; ///< issue week t
    Horizon horizon = Horizon::OneWeek;
    double ht_value = 0.0; ///< realized HR(t+h) - smoothed baseline at t
    HtcClass target;
    int record_index = -1; ///< index into Dataset::records, or -1 when the
                           ///< issue week predates the first full window
};

struct LabelSet {
    std::vector<LabeledExample> examples; ///< ordered by (state code, week)
    int n_skipped = 0;                    ///< (state, week) pairs lacking history or future
};

/// One example per (state, issue week t) with t >= 2 and HR(t+h) in the panel.
inline LabelSet build_labels(const Dataset& ds, Horizon h) {
    LabelSet out;
    const int hw = horizon_weeks(h);
    for (const auto& id : ds.panels.states) {
        const auto& series = ds.panels.epi.at(id.code);
        std::vector<double> hr(series.points.size());
        for (std::size_t i = 0; i < hr.size(); ++i) hr[i] = series.points[i].hosp_rate;
        for (int t = 0; t < series.n_weeks(); ++t) {
            if (t < 2 || t + hw >= series.n_weeks()) {
                ++out.n_skipped;
                continue;
            }
            LabeledExample ex;
            ex.state = id.code;
            ex.week = t;
            ex.horizon = h;
            const TrendValue tv = hosp_trend(hr, t, h);
            ex.ht_value = tv.value;
            ex.target = categorize(tv);
            ex.record_index = ds.record_index(id.code, t);
            out.examples.push_back(std::move(ex));
        }
    }
    return out;
}

inline void write_labels_csv(const std::string& path, const std::vector<LabeledExample>& examples) {
    CsvWriter w(path);
    w.row({"state", "week_index", "horizon", "ht_value", "htc_ordinal", "htc_label"});
    for (const auto& ex : examples)
        w.row({ex.state, std::to_string(ex.week), std::to_string(horizon_weeks(ex.horizon)),
               format_double(ex.ht_value), std::to_string(ex.target.ordinal),
               htc_label(ex.target)});
}

} // namespace epicast
