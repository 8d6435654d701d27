#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "epicast/policy_catalog.hpp"
#include "epicast/targets.hpp"
#include "epicast/types.hpp"

namespace epicast {

struct PromptDocument {
    std::string text; ///< full prompt; includes the target token in training mode
    int special_token_index = -1; ///< whitespace-token position of the series token
    std::string answer_suffix = "The answer is";
    std::string target_token; ///< empty in inference mode
    int word_count = 0;       ///< whitespace tokens of the inference-mode text
};

/// Descriptive label for a state's rank among its peers. The canonical
/// partition is defined on 50 states (1-5, 6-20, 21-30, 31-45, 46-50); other
/// roster sizes scale the breakpoints proportionally.
inline std::string rank_label(int rank, int n_states = 50) {
    if (n_states < 1 || rank < 1 || rank > n_states)
        fail(Errc::RankOutOfRange,
             "rank " + std::to_string(rank) + " of " + std::to_string(n_states));
    const auto cut = [&](double frac) {
        return static_cast<int>(std::lround(frac * n_states));
    };
    if (rank <= cut(0.10)) return "One of the best";
    if (rank <= cut(0.40)) return "Higher than the national average";
    if (rank <= cut(0.60)) return "Close to the national average";
    if (rank <= cut(0.90)) return "Lower than the national average";
    return "One of the lowest";
}

struct NarrativeParams {
    double stable_band = 0.02; ///< |slope| below this fraction of the window mean => stable
    double slow_cut = 0.06;    ///< |slope|/mean tercile boundaries for pace wording
    double fast_cut = 0.15;
};

/// One deterministic sentence fragment describing the series' recent
/// direction and pace, e.g. "increased moderately over the recent weeks".
/// Callers prepend the subject.
inline std::string series_narrative(const std::vector<double>& window,
                                    const NarrativeParams& params = {}) {
    if (window.size() < 4)
        fail(Errc::WindowTooShort, "series_narrative needs >= 4 points, got " +
                                       std::to_string(window.size()));
    // least-squares slope over the last 4 points (centered abscissa, denom 5)
    const std::size_t n = window.size();
    double slope = 0.0;
    for (int k = 0; k < 4; ++k) slope += (k - 1.5) * window[n - 4 + static_cast<std::size_t>(k)];
    slope /= 5.0;
    double mean = 0.0;
    for (double v : window) mean += v;
    mean /= static_cast<double>(window.size());
    const double scale = std::max(std::abs(mean), 1e-12);
    const double ratio = std::abs(slope) / scale;

    if (ratio < params.stable_band) return "remained stable over the recent weeks";
    const std::string verb = slope > 0.0 ? "increased" : "decreased";
    const std::string pace = ratio < params.slow_cut   ? "slowly"
                             : ratio < params.fast_cut ? "moderately"
                                                       : "rapidly";
    return verb + " " + pace + " over the recent weeks";
}

/// Five sentences in C1..H8 order, phrased as items of a policy rundown.
inline std::vector<std::string> policy_text(const PolicyLevels& current,
                                            const PolicyLevels& previous) {
    std::vector<std::string> items;
    for (const auto& entry : policy_catalog()) {
        const auto pi = static_cast<std::size_t>(entry.id);
        const int now = current[pi];
        const int prev = previous[pi];
        const std::string& now_text = policy_level_summary(entry.id, now);
        if (now == prev) {
            items.push_back("the " + entry.prompt_name + " remains " + now_text);
        } else {
            items.push_back("the " + entry.prompt_name + " moving from " +
                            policy_level_summary(entry.id, prev) + " to " + now_text);
        }
    }
    return items;
}

namespace detail {

inline std::string attr_word(VariantAttr a) { return variant_attr_name(a); }

inline std::string pi_band(double pi) {
    if (pi < 0.01) return "below one percent";
    if (pi < 0.03) return "between one and three percent";
    if (pi < 0.10) return "between three and ten percent";
    if (pi < 0.30) return "between ten and thirty percent";
    return "above thirty percent";
}

inline std::string round_percent(double share) {
    return std::to_string(static_cast<int>(std::lround(share * 100.0)));
}

inline std::string round_millions(double population) {
    const long m = std::lround(population / 1e6);
    return std::to_string(std::max(m, 1L));
}

} // namespace detail

/// Variant paragraph; empty string when `include` is false. A variant appears
/// only when its current (window-final) share exceeds 1%.
inline std::string genomic_text(const std::vector<GenomicVariantWindow>& variants, bool include,
                                const NarrativeParams& params = {}) {
    if (!include) return "";
    std::vector<const GenomicVariantWindow*> eligible;
    for (const auto& v : variants)
        if (!v.shares.empty() && v.shares.back() > 0.01) eligible.push_back(&v);
    if (eligible.empty())
        return "Genomic surveillance does not attribute a meaningful share of current samples to "
               "any tracked emerging variant.";
    std::string out = "Genomic surveillance indicates the following variant activity.";
    for (const auto* v : eligible) {
        out += " The variant " + v->info.name + " shows " +
               detail::attr_word(v->info.infectiousness) + " infectiousness, " +
               detail::attr_word(v->info.severity) + " severity, and " +
               detail::attr_word(v->info.immune_resistance) + " immune resistance; its share " +
               series_narrative(v->shares, params) + ".";
    }
    return out;
}

inline std::string spatial_text(const DataRecord& rec) {
    const auto& s = rec.spatial;
    std::string out = rec.state.name + " has a population of about " +
                      detail::round_millions(rec.state.population) + " million residents.";
    out += " About " + detail::round_percent(s.over65_share) +
           " percent of residents are aged sixty five or older, and about " +
           detail::round_percent(s.vulnerable_race_share) +
           " percent belong to racially vulnerable groups.";
    out += " Compared to other states, its overall healthcare system performance ranking is: " +
           rank_label(s.health_overall_rank, rec.n_states) + ".";
    out += " Its pandemic-specific healthcare performance ranking is: " +
           rank_label(s.health_covid_rank, rec.n_states) + ".";
    out += " Its healthcare access ranking is: " + rank_label(s.health_access_rank, rec.n_states) + ".";
    out += " " + rec.state.name + " predominantly voted for " + party_name(s.party) +
           " in the 2020 presidential election.";
    out += " The winning share was about " + detail::round_percent(s.vote_share) +
           " percent of the vote.";
    return out;
}

inline int count_words(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    int n = 0;
    while (in >> word) ++n;
    return n;
}

/// Deterministic prompt assembly. Pass a target to append its class token
/// (training mode); pass nullptr for inference mode.
inline PromptDocument assemble_prompt(const DataRecord& rec, Horizon horizon,
                                      const HtcClass* target = nullptr,
                                      const NarrativeParams& params = {}) {
    const std::string horizon_phrase =
        horizon == Horizon::OneWeek ? "week" : "three weeks";

    std::string header =
        "You are asked to predict the hospitalization trend category for " + rec.state.name +
        " for the upcoming " + horizon_phrase + ".";
    header += " The five possible categories are Substantial Decrease, Moderate Decrease, "
              "Stable, Moderate Increase, and Substantial Increase.";
    header += " Weigh the state profile, the current and previous public health policies, the "
              "recent epidemiological indicators, and any genomic surveillance information "
              "provided below.";

    std::string policy =
        "Public health policies in effect compared to the previous week are as follows: ";
    const auto items = policy_text(rec.policy_now, rec.policy_prev);
    for (std::size_t i = 0; i < items.size(); ++i)
        policy += items[i] + (i + 1 < items.size() ? "; " : ".");

    std::vector<double> cases, dose1, dose2, booster;
    for (const auto& p : rec.epi_window) {
        cases.push_back(p.cases);
        dose1.push_back(p.vax_partial);
        dose2.push_back(p.vax_complete);
        booster.push_back(p.vax_booster);
    }
    std::string epi = "Over the trailing twelve-week window, the weekly reported cases " +
                      series_narrative(cases, params) + ".";
    epi += " The share of residents with at least one vaccine dose " +
           series_narrative(dose1, params) + ".";
    epi += " The share completing the primary vaccination series " +
           series_narrative(dose2, params) + ".";
    epi += " The booster dose coverage " + series_narrative(booster, params) + ".";
    epi += " The cumulative fraction of the population with a reported prior infection is ";
    epi += rec.prev_infections < 0.0 ? "not yet established for this early period."
                                     : detail::pi_band(rec.prev_infections) + ".";
    epi += " The recent weekly hospitalization rate trajectory is summarized by: " +
           std::string(kTimeSeriesToken) + ".";

    const std::string genomic = genomic_text(rec.genomic, rec.include_genomic, params);

    PromptDocument doc;
    doc.text = header + "\n\n" + spatial_text(rec) + "\n\n" + policy + "\n\n" + epi;
    if (!genomic.empty()) doc.text += "\n\n" + genomic;
    doc.text += "\n\n" + doc.answer_suffix;
    doc.word_count = count_words(doc.text);

    // whitespace-token position of the (unique) series token
    {
        std::istringstream in(doc.text);
        std::string word;
        int pos = 0;
        const std::string needle = std::string(kTimeSeriesToken) + ".";
        while (in >> word) {
            if (word == needle || word == kTimeSeriesToken) {
                doc.special_token_index = pos;
                break;
            }
            ++pos;
        }
    }
    if (target != nullptr) {
        doc.target_token = class_token(*target);
        doc.text += " " + doc.target_token;
    }
    return doc;
}

} // namespace epicast
