#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "epicast/encoders.hpp"
#include "epicast/metrics.hpp"
#include "epicast/model.hpp"
#include "epicast/rng.hpp"
#include "epicast/types.hpp"

namespace epicast {

// --- PrevTrend ----------------------------------------------------------------

/// Cross-state frequency distribution of the realized (backward-looking)
/// categories; the same distribution is issued for every state.
inline Probs prevtrend(const std::vector<HtcClass>& realized) {
    if (realized.empty()) fail(Errc::EmptyStateSet, "prevtrend over zero states");
    Probs p{};
    for (const auto& c : realized) {
        if (c.ordinal < 1 || c.ordinal > kNumClasses)
            fail(Errc::InvalidValue, "class ordinal out of 1..5");
        p[static_cast<std::size_t>(c.ordinal - 1)] += 1.0;
    }
    for (auto& v : p) v /= static_cast<double>(realized.size());
    return p;
}

/// Backward-looking realized category for (state series, issue week t):
/// categorize(HR(t) - smoothed baseline h weeks earlier). Requires t-h >= 2.
inline HtcClass realized_class(const std::vector<double>& hr, int t, Horizon h) {
    const int hw = horizon_weeks(h);
    if (t >= static_cast<int>(hr.size()))
        fail(Errc::FutureUnavailable, "realized_class at t=" + std::to_string(t));
    return categorize({hr[static_cast<std::size_t>(t)] - smoothed_hr(hr, t - hw), h});
}

// --- sequence classifiers -------------------------------------------------------

inline constexpr int kSeqFeatures = 7; ///< HR, HT, case rate, 3x vax, PI

/// Numeric-only per-step features for the reference classifiers: hosp rate,
/// backward trend, cases per 100k, the three vaccination fractions, and the
/// record's previous-infection fraction (constant across steps; 0 when the
/// week lacks history). No policy/genomic/spatial text-derived features.
inline Mat seq_features(const DataRecord& rec) {
    std::vector<double> hr(rec.epi_window.size());
    for (std::size_t i = 0; i < hr.size(); ++i) hr[i] = rec.epi_window[i].hosp_rate;
    Mat X(static_cast<long>(rec.epi_window.size()), kSeqFeatures);
    const double pi = rec.prev_infections < 0.0 ? 0.0 : rec.prev_infections;
    for (long i = 0; i < X.rows(); ++i) {
        const auto& pt = rec.epi_window[static_cast<std::size_t>(i)];
        X(i, 0) = pt.hosp_rate;
        X(i, 1) = backward_trend(hr, static_cast<int>(i));
        X(i, 2) = pt.cases / rec.state.population * 1e5;
        X(i, 3) = pt.vax_partial;
        X(i, 4) = pt.vax_complete;
        X(i, 5) = pt.vax_booster;
        X(i, 6) = pi;
    }
    return X;
}

enum class SeqKind { GRU, LSTM, BiLSTM };

inline const char* seq_kind_name(SeqKind k) {
    switch (k) {
        case SeqKind::GRU: return "gru-baseline";
        case SeqKind::LSTM: return "lstm-baseline";
        case SeqKind::BiLSTM: return "bilstm-baseline";
    }
    fail(Errc::InvalidValue, "bad classifier kind");
}

struct SeqExample {
    Mat features; ///< steps x kSeqFeatures, raw
    int target_ordinal = 0;
};

struct SeqClassifierConfig {
    int hidden = 64;
    int steps = 120;
    int batch_size = 16;
    double lr = 1e-3;
    double clip_norm = 1.0;
};

class SeqClassifier {
  public:
    SeqKind kind = SeqKind::GRU;
    EncoderSpec spec{EncoderKind::GRU, kSeqFeatures, 64};
    std::vector<Mat> enc_params;  ///< forward direction
    std::vector<Mat> enc_params_bwd; ///< BiLSTM only
    Mat head_w, head_b;
    std::array<double, kSeqFeatures> feat_mean{}, feat_std{};

    Mat standardize(const Mat& x) const {
        Mat out = x;
        for (long c = 0; c < out.cols(); ++c)
            out.col(c) = (out.col(c).array() - feat_mean[static_cast<std::size_t>(c)]) /
                         feat_std[static_cast<std::size_t>(c)];
        return out;
    }

    /// Hidden representation: final state, or fwd/bwd concatenation (2x width)
    /// for the bidirectional variant.
    Var hidden_on_tape(Tape& t, const Mat& raw, std::vector<Var>& leaves_fwd,
                       std::vector<Var>& leaves_bwd) const {
        const Mat x = standardize(raw);
        leaves_fwd.clear();
        leaves_bwd.clear();
        for (const auto& m : enc_params) leaves_fwd.push_back(t.leaf(m, true));
        Var xin = t.leaf(x, false);
        Var h = encode_on_tape(t, spec, leaves_fwd, xin);
        if (kind == SeqKind::BiLSTM) {
            Mat rev(x.rows(), x.cols());
            for (long i = 0; i < x.rows(); ++i) rev.row(i) = x.row(x.rows() - 1 - i);
            for (const auto& m : enc_params_bwd) leaves_bwd.push_back(t.leaf(m, true));
            Var xrev = t.leaf(rev, false);
            Var hb = encode_on_tape(t, spec, leaves_bwd, xrev);
            h = t.concat_cols({h, hb});
        }
        return h;
    }

    Probs predict(const Mat& raw_features) const {
        Tape t;
        std::vector<Var> lf, lb;
        Var h = hidden_on_tape(t, raw_features, lf, lb);
        Var logits = t.add_rowvec(t.matmul(h, t.leaf(head_w, false)), t.leaf(head_b, false));
        const Mat& l = t.value(logits);
        Probs p{};
        const double m = l.row(0).maxCoeff();
        double sum = 0.0;
        for (int k = 0; k < kNumClasses; ++k) {
            p[static_cast<std::size_t>(k)] = std::exp(l(0, k) - m);
            sum += p[static_cast<std::size_t>(k)];
        }
        for (auto& v : p) v /= sum;
        return p;
    }
};

/// Deterministic Adam training of a sequence classifier on numeric features.
inline SeqClassifier train_seq_classifier(SeqKind kind, const std::vector<SeqExample>& examples,
                                          const SeqClassifierConfig& cfg, std::uint64_t seed) {
    if (examples.empty()) fail(Errc::EmptyInput, "no classifier examples");
    SeqClassifier clf;
    clf.kind = kind;
    clf.spec = {kind == SeqKind::GRU ? EncoderKind::GRU : EncoderKind::LSTM, kSeqFeatures,
                cfg.hidden};

    // standardization over all steps of all examples
    std::array<double, kSeqFeatures> sum{}, sumsq{};
    long n = 0;
    for (const auto& ex : examples)
        for (long i = 0; i < ex.features.rows(); ++i, ++n)
            for (long c = 0; c < kSeqFeatures; ++c) {
                sum[static_cast<std::size_t>(c)] += ex.features(i, c);
                sumsq[static_cast<std::size_t>(c)] += ex.features(i, c) * ex.features(i, c);
            }
    for (std::size_t c = 0; c < kSeqFeatures; ++c) {
        const double mean = sum[c] / static_cast<double>(n);
        clf.feat_mean[c] = mean;
        clf.feat_std[c] = std::max(
            std::sqrt(std::max(sumsq[c] / static_cast<double>(n) - mean * mean, 0.0)), 1e-8);
    }

    Rng rng(seed);
    const auto init_mats = [&](std::vector<Mat>& out) {
        out.clear();
        for (const auto& shape : encoder_param_shapes(clf.spec)) {
            Mat m(shape.rows, shape.cols);
            for (long i = 0; i < m.rows(); ++i)
                for (long j = 0; j < m.cols(); ++j) m(i, j) = rng.normal(0.0, 0.1);
            if (shape.rows == 1) m.setZero(); // biases
            out.push_back(std::move(m));
        }
    };
    init_mats(clf.enc_params);
    if (kind == SeqKind::BiLSTM) init_mats(clf.enc_params_bwd);
    const int head_in = kind == SeqKind::BiLSTM ? 2 * cfg.hidden : cfg.hidden;
    clf.head_w = Mat(head_in, kNumClasses);
    for (long i = 0; i < clf.head_w.rows(); ++i)
        for (long j = 0; j < clf.head_w.cols(); ++j) clf.head_w(i, j) = rng.normal(0.0, 0.05);
    clf.head_b = Mat::Zero(1, kNumClasses);

    // flat parameter list for the optimizer
    std::vector<Mat*> flat;
    for (auto& m : clf.enc_params) flat.push_back(&m);
    for (auto& m : clf.enc_params_bwd) flat.push_back(&m);
    flat.push_back(&clf.head_w);
    flat.push_back(&clf.head_b);
    std::vector<Mat> am(flat.size()), av(flat.size()), grad(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        am[i] = Mat::Zero(flat[i]->rows(), flat[i]->cols());
        av[i] = am[i];
    }

    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::size_t cursor = 0;
    const std::vector<int> head_ids = {0, 1, 2, 3, 4};

    for (int step = 1; step <= cfg.steps; ++step) {
        for (std::size_t i = 0; i < flat.size(); ++i)
            grad[i] = Mat::Zero(flat[i]->rows(), flat[i]->cols());
        for (int b = 0; b < cfg.batch_size; ++b) {
            if (cursor >= order.size()) {
                rng.shuffle(order);
                cursor = 0;
            }
            const auto& ex = examples[order[cursor++]];
            Tape t;
            std::vector<Var> lf, lb;
            Var h = clf.hidden_on_tape(t, ex.features, lf, lb);
            Var wv = t.leaf(clf.head_w, true);
            Var bv = t.leaf(clf.head_b, true);
            Var logits = t.add_rowvec(t.matmul(h, wv), bv);
            Var loss = t.restricted_ce(logits, head_ids, ex.target_ordinal - 1);
            const double lv = t.value(loss)(0, 0);
            if (!std::isfinite(lv)) fail(Errc::NonFiniteLoss, "classifier step " + std::to_string(step));
            t.backward(loss);
            std::size_t gi = 0;
            for (Var v : lf) grad[gi++] += t.grad(v);
            for (Var v : lb) grad[gi++] += t.grad(v);
            grad[gi++] += t.grad(wv);
            grad[gi++] += t.grad(bv);
        }
        double norm_sq = 0.0;
        for (auto& g : grad) {
            g /= static_cast<double>(cfg.batch_size);
            norm_sq += g.squaredNorm();
        }
        const double norm = std::sqrt(norm_sq);
        const double scale = (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) ? cfg.clip_norm / norm : 1.0;
        const double bc1 = 1.0 - std::pow(0.9, step);
        const double bc2 = 1.0 - std::pow(0.999, step);
        for (std::size_t i = 0; i < flat.size(); ++i) {
            const Mat g = grad[i] * scale;
            am[i] = 0.9 * am[i] + 0.1 * g;
            av[i] = (0.999 * av[i].array() + 0.001 * g.array().square()).matrix();
            flat[i]->array() -=
                cfg.lr * (am[i] / bc1).array() / ((av[i] / bc2).array().sqrt() + 1e-8);
        }
    }
    return clf;
}

namespace bundle_io {

inline void put_mat(std::ostream& out, const Mat& m) {
    put<std::int64_t>(out, m.rows());
    put<std::int64_t>(out, m.cols());
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) put<double>(out, m(i, j));
}

inline Mat get_mat(std::istream& in) {
    const auto rows = get<std::int64_t>(in);
    const auto cols = get<std::int64_t>(in);
    if (rows < 0 || cols < 0 || rows * cols > (1ll << 28))
        fail(Errc::ParseError, "bundle matrix shape out of range");
    Mat m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) m(i, j) = get<double>(in);
    return m;
}

} // namespace bundle_io

inline void save_seq_classifier(const SeqClassifier& clf, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    using namespace bundle_io;
    put_bytes(out, "EPSB", 4);
    put<std::uint32_t>(out, 1);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(clf.kind));
    put<std::int32_t>(out, clf.spec.hidden);
    for (double v : clf.feat_mean) put<double>(out, v);
    for (double v : clf.feat_std) put<double>(out, v);
    const auto put_group = [&](const std::vector<Mat>& ms) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(ms.size()));
        for (const auto& m : ms) put_mat(out, m);
    };
    put_group(clf.enc_params);
    put_group(clf.enc_params_bwd);
    put_mat(out, clf.head_w);
    put_mat(out, clf.head_b);
    if (!out) fail(Errc::IoError, "failed writing " + path);
}

inline SeqClassifier load_seq_classifier(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::MissingBundle, path);
    using namespace bundle_io;
    char magic[4];
    get_bytes(in, magic, 4);
    if (std::memcmp(magic, "EPSB", 4) != 0) fail(Errc::ParseError, "not a classifier bundle: " + path);
    if (get<std::uint32_t>(in) != 1) fail(Errc::ParseError, "unsupported classifier bundle version");
    SeqClassifier clf;
    const auto kind_byte = get<std::uint8_t>(in);
    if (kind_byte > 2) fail(Errc::ParseError, "bad classifier kind byte");
    clf.kind = static_cast<SeqKind>(kind_byte);
    const int hidden = get<std::int32_t>(in);
    clf.spec = {clf.kind == SeqKind::GRU ? EncoderKind::GRU : EncoderKind::LSTM, kSeqFeatures,
                hidden};
    for (auto& v : clf.feat_mean) v = get<double>(in);
    for (auto& v : clf.feat_std) v = get<double>(in);
    const auto get_group = [&](std::vector<Mat>& ms) {
        const auto n = get<std::uint32_t>(in);
        if (n > 16) fail(Errc::ParseError, "too many parameter groups");
        ms.clear();
        for (std::uint32_t i = 0; i < n; ++i) ms.push_back(get_mat(in));
    };
    get_group(clf.enc_params);
    get_group(clf.enc_params_bwd);
    clf.head_w = get_mat(in);
    clf.head_b = get_mat(in);
    return clf;
}

// --- autoregressive point forecaster --------------------------------------------

struct ArCoefficients {
    int p = 3;
    Eigen::VectorXd coef; ///< [c_1..c_p, intercept] on first differences
};

/// Least-squares AR(p) with intercept on the first differences of the series.
/// Rank-deficient systems take the minimum-norm solution; a non-finite solve
/// falls back to persistence (all-zero coefficients).
inline ArCoefficients ar_fit(const std::vector<double>& series, int p = 3) {
    if (p < 1) fail(Errc::InvalidConfig, "AR order must be >= 1");
    if (static_cast<int>(series.size()) < p + 2)
        fail(Errc::InsufficientHistory, "AR(" + std::to_string(p) + ") needs length >= " +
                                            std::to_string(p + 2));
    const int nd = static_cast<int>(series.size()) - 1;
    std::vector<double> d(static_cast<std::size_t>(nd));
    for (int i = 0; i < nd; ++i)
        d[static_cast<std::size_t>(i)] = series[static_cast<std::size_t>(i + 1)] -
                                         series[static_cast<std::size_t>(i)];
    const int rows = nd - p;
    Mat X(rows, p + 1);
    Eigen::VectorXd y(rows);
    for (int r = 0; r < rows; ++r) {
        for (int j = 0; j < p; ++j) X(r, j) = d[static_cast<std::size_t>(p + r - 1 - j)];
        X(r, p) = 1.0;
        y(r) = d[static_cast<std::size_t>(p + r)];
    }
    ArCoefficients out;
    out.p = p;
    out.coef = X.completeOrthogonalDecomposition().solve(y);
    if (!out.coef.allFinite()) out.coef = Eigen::VectorXd::Zero(p + 1);
    return out;
}

/// Iterated h-step-ahead point forecast of the series level.
inline double ar_forecast(const ArCoefficients& ar, const std::vector<double>& series, int h) {
    if (static_cast<int>(series.size()) < ar.p + 1)
        fail(Errc::InsufficientHistory, "series shorter than AR order + 1");
    if (h < 1) fail(Errc::InvalidConfig, "forecast horizon must be >= 1");
    std::vector<double> lags(static_cast<std::size_t>(ar.p)); // most recent first
    for (int j = 0; j < ar.p; ++j) {
        const auto i = series.size() - 1 - static_cast<std::size_t>(j);
        lags[static_cast<std::size_t>(j)] = series[i] - series[i - 1];
    }
    double level = series.back();
    for (int step = 0; step < h; ++step) {
        double dhat = ar.coef(ar.p);
        for (int j = 0; j < ar.p; ++j) dhat += ar.coef(j) * lags[static_cast<std::size_t>(j)];
        level += dhat;
        for (int j = ar.p - 1; j > 0; --j)
            lags[static_cast<std::size_t>(j)] = lags[static_cast<std::size_t>(j - 1)];
        lags[0] = dhat;
    }
    return level;
}

/// Point category for a forecast issued at the series' final week t:
/// categorize(forecast(t+h) - smoothed baseline at t).
inline HtcClass ar_class(const ArCoefficients& ar, const std::vector<double>& series, Horizon h) {
    const int t = static_cast<int>(series.size()) - 1;
    const double forecast = ar_forecast(ar, series, horizon_weeks(h));
    return categorize({forecast - smoothed_hr(series, t), h});
}

} // namespace epicast
