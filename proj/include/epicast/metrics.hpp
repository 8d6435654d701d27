#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epicast/targets.hpp"

namespace epicast {

/// Probability over the five ordinal classes; index k holds P(class k+1).
using Probs = std::array<double, kNumClasses>;

inline void validate_distribution(const Probs& p) {
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0)
            fail(Errc::InvalidDistribution, "probability out of range");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        fail(Errc::InvalidDistribution, "probabilities sum to " + std::to_string(sum));
}

/// Point prediction = argmax; ties break toward the lower ordinal.
inline int argmax_class(const Probs& p) {
    int best = 1;
    for (int k = 2; k <= kNumClasses; ++k)
        if (p[static_cast<std::size_t>(k - 1)] > p[static_cast<std::size_t>(best - 1)]) best = k;
    return best;
}

inline Probs one_hot(int ordinal) {
    Probs p{};
    p.at(static_cast<std::size_t>(ordinal - 1)) = 1.0;
    return p;
}

namespace detail {
inline void check_pair_lengths(std::size_t a, std::size_t b) {
    if (a != b) fail(Errc::LengthMismatch, std::to_string(a) + " vs " + std::to_string(b));
    if (a == 0) fail(Errc::EmptyInput, "no examples to score");
}
} // namespace detail

// --- per-example scores -----------------------------------------------------

inline double example_wmse(const Probs& p, int truth) {
    double s = 0.0;
    for (int k = 1; k <= kNumClasses; ++k)
        s += p[static_cast<std::size_t>(k - 1)] * (k - truth) * (k - truth);
    return s;
}

inline double example_brier(const Probs& p, int truth) {
    double s = 0.0;
    for (int k = 1; k <= kNumClasses; ++k) {
        const double diff = p[static_cast<std::size_t>(k - 1)] - (k == truth ? 1.0 : 0.0);
        s += diff * diff;
    }
    return s;
}

inline double example_rps(const Probs& p, int truth) {
    double s = 0.0, cum_p = 0.0, cum_t = 0.0;
    for (int k = 1; k <= kNumClasses; ++k) {
        cum_p += p[static_cast<std::size_t>(k - 1)];
        cum_t += k == truth ? 1.0 : 0.0;
        s += (cum_t - cum_p) * (cum_t - cum_p);
    }
    return s;
}

// --- dataset-level scores ---------------------------------------------------

inline double accuracy(const std::vector<int>& preds, const std::vector<int>& truths) {
    detail::check_pair_lengths(preds.size(), truths.size());
    double hits = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == truths[i] ? 1.0 : 0.0;
    return hits / static_cast<double>(preds.size());
}

inline double mse(const std::vector<int>& preds, const std::vector<int>& truths) {
    detail::check_pair_lengths(preds.size(), truths.size());
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double d = preds[i] - truths[i];
        s += d * d;
    }
    return s / static_cast<double>(preds.size());
}

inline double wmse(const std::vector<Probs>& dists, const std::vector<int>& truths) {
    detail::check_pair_lengths(dists.size(), truths.size());
    double s = 0.0;
    for (std::size_t i = 0; i < dists.size(); ++i) {
        validate_distribution(dists[i]);
        s += example_wmse(dists[i], truths[i]);
    }
    return s / static_cast<double>(dists.size());
}

inline double brier(const std::vector<Probs>& dists, const std::vector<int>& truths) {
    detail::check_pair_lengths(dists.size(), truths.size());
    double s = 0.0;
    for (std::size_t i = 0; i < dists.size(); ++i) {
        validate_distribution(dists[i]);
        s += example_brier(dists[i], truths[i]);
    }
    return s / static_cast<double>(dists.size());
}

inline double rps(const std::vector<Probs>& dists, const std::vector<int>& truths) {
    detail::check_pair_lengths(dists.size(), truths.size());
    double s = 0.0;
    for (std::size_t i = 0; i < dists.size(); ++i) {
        validate_distribution(dists[i]);
        s += example_rps(dists[i], truths[i]);
    }
    return s / static_cast<double>(dists.size());
}

// --- reports ----------------------------------------------------------------

/// counts[true-1][pred-1]
using ConfusionMatrix = std::array<std::array<long, kNumClasses>, kNumClasses>;

inline ConfusionMatrix confusion_matrix(const std::vector<int>& preds,
                                        const std::vector<int>& truths) {
    detail::check_pair_lengths(preds.size(), truths.size());
    ConfusionMatrix m{};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (truths[i] < 1 || truths[i] > kNumClasses || preds[i] < 1 || preds[i] > kNumClasses)
            fail(Errc::InvalidValue, "class ordinal out of 1..5");
        ++m[static_cast<std::size_t>(truths[i] - 1)][static_cast<std::size_t>(preds[i] - 1)];
    }
    return m;
}

struct ConfidencePoint {
    double threshold = 0.0;
    std::optional<double> accuracy; ///< absent when nothing is retained
    double coverage = 0.0;
};

inline std::vector<ConfidencePoint> confidence_curve(const std::vector<Probs>& dists,
                                                     const std::vector<int>& truths,
                                                     const std::vector<double>& thresholds) {
    detail::check_pair_lengths(dists.size(), truths.size());
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] < thresholds[i - 1])
            fail(Errc::InvalidConfig, "thresholds must be sorted ascending");
    std::vector<ConfidencePoint> curve;
    for (double tau : thresholds) {
        ConfidencePoint pt;
        pt.threshold = tau;
        long kept = 0, hits = 0;
        for (std::size_t i = 0; i < dists.size(); ++i) {
            const int pred = argmax_class(dists[i]);
            if (dists[i][static_cast<std::size_t>(pred - 1)] >= tau) {
                ++kept;
                hits += pred == truths[i] ? 1 : 0;
            }
        }
        pt.coverage = static_cast<double>(kept) / static_cast<double>(dists.size());
        if (kept > 0) pt.accuracy = static_cast<double>(hits) / static_cast<double>(kept);
        curve.push_back(pt);
    }
    return curve;
}

/// Aggregate scores for one model (or one group of examples). Probabilistic
/// entries are meaningful only when `probabilistic` is set; point-forecast
/// models are scored on accuracy and MSE alone.
struct MetricAggregate {
    double accuracy = 0.0;
    double mse = 0.0;
    double wmse = 0.0;
    double brier = 0.0;
    double rps = 0.0;
    bool probabilistic = true;
    long n = 0;
};

inline MetricAggregate compute_aggregate(const std::vector<Probs>& dists,
                                         const std::vector<int>& truths) {
    MetricAggregate a;
    std::vector<int> preds(dists.size());
    for (std::size_t i = 0; i < dists.size(); ++i) preds[i] = argmax_class(dists[i]);
    a.accuracy = accuracy(preds, truths);
    a.mse = mse(preds, truths);
    a.wmse = wmse(dists, truths);
    a.brier = brier(dists, truths);
    a.rps = rps(dists, truths);
    a.n = static_cast<long>(dists.size());
    return a;
}

inline MetricAggregate compute_point_aggregate(const std::vector<int>& preds,
                                               const std::vector<int>& truths) {
    MetricAggregate a;
    a.accuracy = accuracy(preds, truths);
    a.mse = mse(preds, truths);
    a.probabilistic = false;
    a.n = static_cast<long>(preds.size());
    return a;
}

// --- model ranking ----------------------------------------------------------

inline const std::array<const char*, 5>& metric_names() {
    static const std::array<const char*, 5> names = {"accuracy", "mse", "wmse", "brier", "rps"};
    return names;
}

struct ModelRanks {
    /// metric name -> rank (1 = best); absent for metrics the model lacks
    std::map<std::string, int> per_metric;
    double average_rank = 0.0;
};

/// Rank 1 = best per metric (higher-better for accuracy, lower-better
/// otherwise). Ties share the minimum rank. A model's average rank is the mean
/// over the metrics it has values for.
inline std::map<std::string, ModelRanks>
rank_models(const std::vector<std::pair<std::string, MetricAggregate>>& models) {
    if (models.empty()) fail(Errc::EmptyInput, "no models to rank");
    std::map<std::string, ModelRanks> out;
    for (const char* metric : metric_names()) {
        const bool higher_better = std::string(metric) == "accuracy";
        std::vector<std::pair<std::string, double>> entries;
        for (const auto& [name, agg] : models) {
            double value;
            if (std::string(metric) == "accuracy") value = agg.accuracy;
            else if (std::string(metric) == "mse") value = agg.mse;
            else if (!agg.probabilistic) continue;
            else if (std::string(metric) == "wmse") value = agg.wmse;
            else if (std::string(metric) == "brier") value = agg.brier;
            else value = agg.rps;
            entries.emplace_back(name, value);
        }
        for (const auto& [name, value] : entries) {
            int rank = 1;
            for (const auto& [other, ov] : entries)
                if (higher_better ? ov > value : ov < value) ++rank;
            out[name].per_metric[metric] = rank;
        }
    }
    for (auto& [name, ranks] : out) {
        double sum = 0.0;
        for (const auto& [metric, r] : ranks.per_metric) sum += r;
        ranks.average_rank = sum / static_cast<double>(ranks.per_metric.size());
    }
    return out;
}

} // namespace epicast
