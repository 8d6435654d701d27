#pragma once

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <vector>

#include "epicast/model.hpp"

namespace epicast {

struct TrainConfig {
    int steps = 100;
    int batch_size = 16;
    double lr = 1e-3;
    double clip_norm = 1.0; ///< global gradient-norm clip
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Column-wise mean/std of the raw encoder features over the given examples,
/// stored into the model (used by every subsequent encode).
inline void fit_standardization(Model& model, const std::vector<TokenizedExample>& examples) {
    if (examples.empty()) fail(Errc::EmptyInput, "no examples to fit standardization");
    std::array<double, 2> sum{0.0, 0.0}, sumsq{0.0, 0.0};
    long n = 0;
    for (const auto& ex : examples) {
        for (long i = 0; i < ex.features.rows(); ++i) {
            for (long c = 0; c < 2; ++c) {
                const double v = ex.features(i, c);
                sum[static_cast<std::size_t>(c)] += v;
                sumsq[static_cast<std::size_t>(c)] += v * v;
            }
            ++n;
        }
    }
    for (std::size_t c = 0; c < 2; ++c) {
        const double mean = sum[c] / static_cast<double>(n);
        const double var = sumsq[c] / static_cast<double>(n) - mean * mean;
        model.feat_mean[c] = mean;
        model.feat_std[c] = std::max(std::sqrt(std::max(var, 0.0)), 1e-8);
    }
}

struct TrainTrace {
    std::vector<double> step_loss; ///< mean batch loss per step
};

/// Deterministic mini-batch training. Gradients flow only to trainable
/// parameters (token embeddings, output projection, encoder); everything else
/// stays bitwise untouched. Optional JSONL log: {"step":..,"loss":..,"wallclock":..}.
inline TrainTrace train(Model& model, const std::vector<TokenizedExample>& examples,
                        const TrainConfig& tc, std::uint64_t seed,
                        std::ostream* log = nullptr) {
    if (examples.empty()) fail(Errc::EmptyInput, "no training examples");
    if (tc.steps < 0 || tc.batch_size <= 0 || tc.lr <= 0.0)
        fail(Errc::InvalidConfig, "bad optimizer config");
    for (const auto& ex : examples)
        if (ex.target_ordinal < 1 || ex.target_ordinal > kNumClasses)
            fail(Errc::InvalidValue, "training example lacks a target");

    Rng rng(seed);
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::size_t cursor = 0;

    std::vector<int> trainable;
    for (std::size_t i = 0; i < model.params.size(); ++i)
        if (model.params[i].trainable) trainable.push_back(static_cast<int>(i));
    for (int idx : trainable) {
        Param& p = model.params[static_cast<std::size_t>(idx)];
        if (p.m.size() == 0) {
            p.m = Mat::Zero(p.value.rows(), p.value.cols());
            p.v = Mat::Zero(p.value.rows(), p.value.cols());
        }
    }

    TrainTrace trace;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Mat> grad(model.params.size());

    for (int step = 1; step <= tc.steps; ++step) {
        for (int idx : trainable) {
            Param& p = model.params[static_cast<std::size_t>(idx)];
            grad[static_cast<std::size_t>(idx)] = Mat::Zero(p.value.rows(), p.value.cols());
        }
        double batch_loss = 0.0;
        for (int b = 0; b < tc.batch_size; ++b) {
            if (cursor >= order.size()) {
                rng.shuffle(order);
                cursor = 0;
            }
            const auto& ex = examples[order[cursor++]];
            Model::TapeCtx ctx;
            Var loss = model.example_loss(ctx, ex);
            const double lv = ctx.tape.value(loss)(0, 0);
            if (!std::isfinite(lv))
                fail(Errc::NonFiniteLoss,
                     "step " + std::to_string(step) + " loss " + std::to_string(lv));
            batch_loss += lv;
            ctx.tape.backward(loss);
            for (int idx : trainable) {
                const Var leaf = ctx.leaves[static_cast<std::size_t>(idx)];
                if (leaf.idx >= 0) grad[static_cast<std::size_t>(idx)] += ctx.tape.grad(leaf);
            }
        }
        batch_loss /= tc.batch_size;

        double norm_sq = 0.0;
        for (int idx : trainable) {
            grad[static_cast<std::size_t>(idx)] /= static_cast<double>(tc.batch_size);
            norm_sq += grad[static_cast<std::size_t>(idx)].squaredNorm();
        }
        const double norm = std::sqrt(norm_sq);
        const double scale = (tc.clip_norm > 0.0 && norm > tc.clip_norm) ? tc.clip_norm / norm : 1.0;

        const double bc1 = 1.0 - std::pow(tc.beta1, step);
        const double bc2 = 1.0 - std::pow(tc.beta2, step);
        for (int idx : trainable) {
            Param& p = model.params[static_cast<std::size_t>(idx)];
            const Mat g = grad[static_cast<std::size_t>(idx)] * scale;
            p.m = tc.beta1 * p.m + (1.0 - tc.beta1) * g;
            p.v = (tc.beta2 * p.v.array() + (1.0 - tc.beta2) * g.array().square()).matrix();
            const Mat mhat = p.m / bc1;
            const Mat vhat = p.v / bc2;
            p.value.array() -= tc.lr * mhat.array() / (vhat.array().sqrt() + tc.eps);
        }

        trace.step_loss.push_back(batch_loss);
        if (log != nullptr) {
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            char buf[160];
            std::snprintf(buf, sizeof(buf), "{\"step\":%d,\"loss\":%.12g,\"wallclock\":%.3f}\n",
                          step, batch_loss, wall);
            (*log) << buf;
        }
    }
    return trace;
}

// --- finite-difference gradient verification ---------------------------------

/// Relative error convention: |a - b| / max(1, |a|, |b|), so near-zero
/// gradients are compared absolutely.
inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Central-difference check of d(loss)/d(param) for every trainable-parameter
/// coordinate of `model` on one example. Returns the max relative error.
inline double grad_check_model(Model& model, const TokenizedExample& ex, double h = 1e-5) {
    Model::TapeCtx ctx;
    Var loss = model.example_loss(ctx, ex);
    ctx.tape.backward(loss);
    std::vector<Mat> analytic(model.params.size());
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        if (!model.params[i].trainable) continue;
        const Var leaf = ctx.leaves.empty() ? Var{-1} : ctx.leaves[i];
        analytic[i] = leaf.idx >= 0
                          ? ctx.tape.grad(leaf)
                          : Mat::Zero(model.params[i].value.rows(), model.params[i].value.cols());
    }

    double worst = 0.0;
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        if (!model.params[i].trainable) continue;
        Mat& val = model.params[i].value;
        for (long r = 0; r < val.rows(); ++r)
            for (long c = 0; c < val.cols(); ++c) {
                const double keep = val(r, c);
                val(r, c) = keep + h;
                Model::TapeCtx cp;
                const double lp = cp.tape.value(model.example_loss(cp, ex))(0, 0);
                val(r, c) = keep - h;
                Model::TapeCtx cm;
                const double lm = cm.tape.value(model.example_loss(cm, ex))(0, 0);
                val(r, c) = keep;
                const double fd = (lp - lm) / (2.0 * h);
                worst = std::max(worst, rel_err(analytic[i](r, c), fd));
            }
    }
    return worst;
}

/// Standalone encoder check: loss = z . z over random parameters and inputs.
inline double grad_check_encoder(EncoderKind kind, int input_size, int hidden, int steps,
                                 std::uint64_t seed, double h = 1e-5) {
    EncoderSpec spec{kind, input_size, hidden};
    Rng rng(seed);
    std::vector<Mat> pvals;
    for (const auto& shape : encoder_param_shapes(spec)) {
        Mat m(shape.rows, shape.cols);
        for (long i = 0; i < m.rows(); ++i)
            for (long j = 0; j < m.cols(); ++j) m(i, j) = rng.normal(0.0, 0.4);
        pvals.push_back(std::move(m));
    }
    Mat X(steps, input_size);
    for (long i = 0; i < X.rows(); ++i)
        for (long j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();

    const auto eval = [&](std::vector<Mat>& pv, Tape& tape, std::vector<Var>& leaves) {
        leaves.clear();
        for (const auto& m : pv) leaves.push_back(tape.leaf(m, true));
        Var xin = tape.leaf(X, false);
        Var z = encode_on_tape(tape, spec, leaves, xin);
        return tape.matmul_nt(z, z); // 1x1 scalar
    };

    Tape tape;
    std::vector<Var> leaves;
    Var loss = eval(pvals, tape, leaves);
    tape.backward(loss);

    double worst = 0.0;
    for (std::size_t p = 0; p < pvals.size(); ++p) {
        const Mat analytic = tape.grad(leaves[p]);
        for (long r = 0; r < pvals[p].rows(); ++r)
            for (long c = 0; c < pvals[p].cols(); ++c) {
                const double keep = pvals[p](r, c);
                pvals[p](r, c) = keep + h;
                Tape tp;
                std::vector<Var> lp_leaves;
                const double lp = tp.value(eval(pvals, tp, lp_leaves))(0, 0);
                pvals[p](r, c) = keep - h;
                Tape tm;
                std::vector<Var> lm_leaves;
                const double lm = tm.value(eval(pvals, tm, lm_leaves))(0, 0);
                pvals[p](r, c) = keep;
                const double fd = (lp - lm) / (2.0 * h);
                worst = std::max(worst, rel_err(analytic(r, c), fd));
            }
    }
    return worst;
}

} // namespace epicast
