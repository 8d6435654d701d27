// Acceptance suite: a plain binary that checks the project's release gate
// end to end and prints exactly one PASS/FAIL line per criterion. Tolerances
// and runtime budgets are pinned here in code.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "epicast/pipeline.hpp"

namespace fs = std::filesystem;
using namespace epicast;
using Clock = std::chrono::steady_clock;

namespace {

int g_failed = 0;

double elapsed_s(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count() /
           1000.0;
}

std::string strf(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s (%s)\n", criterion, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failed;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool files_equal(const std::string& a, const std::string& b) { return slurp(a) == slurp(b); }

struct TempTree {
    fs::path root;
    explicit TempTree(const std::string& tag) {
        root = fs::temp_directory_path() / ("epicast_accept_" + tag);
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~TempTree() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }
    std::string str() const { return root.string(); }
};

double median3(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

// ---------------------------------------------------------------------------
// Criterion 1 — scoring-rule oracles and a brute-force cross-check.

void criterion_1() {
    const auto start = Clock::now();
    const double kTol = 1e-12;
    const double kBudget = 5.0;
    bool ok = true;
    std::string why;

    const Probs uniform{0.2, 0.2, 0.2, 0.2, 0.2};
    if (std::abs(example_wmse(uniform, 3) - 2.0) > kTol) { ok = false; why = "wmse(uniform,3) != 2.0"; }
    if (std::abs(example_brier(uniform, 3) - 0.8) > kTol) { ok = false; why = "brier(uniform) != 0.8"; }
    if (std::abs(example_rps(uniform, 3) - 0.40) > kTol) { ok = false; why = "rps(uniform,3) != 0.40"; }

    // brute-force re-derivations, written independently of metrics.hpp
    const auto brute_wmse = [](const Probs& p, int t) {
        double s = 0.0;
        for (int k = 1; k <= 5; ++k) s += p[static_cast<std::size_t>(k - 1)] * (k - t) * (k - t);
        return s;
    };
    const auto brute_brier = [](const Probs& p, int t) {
        double s = 0.0;
        for (int k = 1; k <= 5; ++k) {
            const double e = p[static_cast<std::size_t>(k - 1)] - (k == t ? 1.0 : 0.0);
            s += e * e;
        }
        return s;
    };
    const auto brute_rps = [](const Probs& p, int t) {
        double s = 0.0, cp = 0.0;
        for (int k = 1; k <= 5; ++k) {
            cp += p[static_cast<std::size_t>(k - 1)];
            const double ct = k >= t ? 1.0 : 0.0;
            s += (cp - ct) * (cp - ct);
        }
        return s;
    };
    const auto brute_argmax = [](const Probs& p) {
        int best = 1;
        for (int k = 2; k <= 5; ++k)
            if (p[static_cast<std::size_t>(k - 1)] > p[static_cast<std::size_t>(best - 1)])
                best = k;
        return best;
    };

    Rng rng(424242);
    std::vector<Probs> dists;
    std::vector<int> truths;
    double worst = 0.0;
    double acc_sum = 0.0, mse_sum = 0.0, wmse_sum = 0.0, brier_sum = 0.0, rps_sum = 0.0;
    const int kFixtures = 1000;
    for (int i = 0; i < kFixtures; ++i) {
        Probs p{};
        double sum = 0.0;
        for (auto& v : p) {
            v = std::exp(2.0 * rng.uniform() - 1.0);
            sum += v;
        }
        for (auto& v : p) v /= sum;
        const int t = 1 + static_cast<int>(rng.uniform() * 5.0) % 5;
        worst = std::max(worst, std::abs(example_wmse(p, t) - brute_wmse(p, t)));
        worst = std::max(worst, std::abs(example_brier(p, t) - brute_brier(p, t)));
        worst = std::max(worst, std::abs(example_rps(p, t) - brute_rps(p, t)));
        const int pred = brute_argmax(p);
        if (pred != argmax_class(p)) { ok = false; why = "argmax mismatch"; }
        acc_sum += pred == t ? 1.0 : 0.0;
        mse_sum += (pred - t) * (pred - t);
        wmse_sum += brute_wmse(p, t);
        brier_sum += brute_brier(p, t);
        rps_sum += brute_rps(p, t);
        dists.push_back(p);
        truths.push_back(t);
    }
    const MetricAggregate agg = compute_aggregate(dists, truths);
    worst = std::max(worst, std::abs(agg.accuracy - acc_sum / kFixtures));
    worst = std::max(worst, std::abs(agg.mse - mse_sum / kFixtures));
    worst = std::max(worst, std::abs(agg.wmse - wmse_sum / kFixtures));
    worst = std::max(worst, std::abs(agg.brier - brier_sum / kFixtures));
    worst = std::max(worst, std::abs(agg.rps - rps_sum / kFixtures));
    if (worst > kTol) { ok = false; why = strf("brute-force gap %.3e > 1e-12", worst); }

    const double secs = elapsed_s(start);
    if (secs >= kBudget) { ok = false; why = strf("runtime %.1fs >= %.0fs", secs, kBudget); }
    report(1, ok,
           ok ? strf("pinned uniform values exact; 1000 fixtures, max gap %.2e <= 1e-12; %.1fs < 5s",
                     worst, secs)
              : why);
}

// ---------------------------------------------------------------------------
// Criterion 2 — label construction vs an oracle reading the raw CSV.

struct OracleLabel {
    std::string state;
    int week;
    double value;
    int ordinal;
    int record_index;
};

void criterion_2() {
    const auto start = Clock::now();
    const double kBudget = 10.0;
    bool ok = true;
    std::string why;

    SyntheticConfig cfg;
    cfg.n_states = 50;
    cfg.n_weeks = 104;
    TempTree tmp("labels");
    write_panels(tmp.str(), generate_synthetic(cfg, 7));

    // oracle side: parse epi.csv with nothing but string splitting
    std::vector<std::string> codes;                 // in file order (sorted)
    std::map<std::string, std::vector<double>> hr;  // state -> weekly HR
    {
        std::ifstream in(tmp.str() + "/epi.csv");
        std::string line;
        std::getline(in, line);
        std::vector<std::string> head;
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) head.push_back(cell);
        const auto col = [&](const std::string& name) {
            for (std::size_t i = 0; i < head.size(); ++i)
                if (head[i] == name) return static_cast<int>(i);
            return -1;
        };
        const int c_state = col("state"), c_hr = col("hosp_rate");
        if (c_state < 0 || c_hr < 0) { ok = false; why = "epi.csv missing columns"; }
        while (ok && std::getline(in, line)) {
            std::vector<std::string> cells;
            std::stringstream ls(line);
            while (std::getline(ls, cell, ',')) cells.push_back(cell);
            const std::string& code = cells[static_cast<std::size_t>(c_state)];
            if (!hr.count(code)) codes.push_back(code);
            hr[code].push_back(std::strtod(cells[static_cast<std::size_t>(c_hr)].c_str(), nullptr));
        }
    }

    const Dataset ds = assemble_dataset(load_panels(tmp.str()), 12);
    long compared = 0;
    for (const int h : {1, 3}) {
        if (!ok) break;
        // oracle labels: trailing 3-week mean baseline, horizon-specific bands,
        // boundaries assigned to the less extreme class
        const double a = h == 1 ? 1.0 : 1.5;
        const double b = h == 1 ? 3.0 : 4.5;
        std::vector<OracleLabel> oracle;
        long skipped = 0;
        const int n = cfg.n_weeks;
        const int per_state = n - 11;
        for (std::size_t si = 0; si < codes.size(); ++si) {
            const auto& series = hr.at(codes[si]);
            for (int t = 0; t < n; ++t) {
                if (t < 2 || t + h >= n) {
                    ++skipped;
                    continue;
                }
                const double smoothed = (series[static_cast<std::size_t>(t - 2)] +
                                         series[static_cast<std::size_t>(t - 1)] +
                                         series[static_cast<std::size_t>(t)]) /
                                        3.0;
                const double v = series[static_cast<std::size_t>(t + h)] - smoothed;
                int ord;
                if (v < -b) ord = 1;
                else if (v < -a) ord = 2;
                else if (v <= a) ord = 3;
                else if (v <= b) ord = 4;
                else ord = 5;
                const int ri =
                    t < 11 ? -1 : static_cast<int>(si) * per_state + (t - 11);
                oracle.push_back({codes[si], t, v, ord, ri});
            }
        }

        const LabelSet labels = build_labels(ds, horizon_from_int(h));
        if (labels.examples.size() != oracle.size()) {
            ok = false;
            why = strf("h%d example count %zu != oracle %zu", h, labels.examples.size(),
                       oracle.size());
            break;
        }
        if (labels.n_skipped != skipped) {
            ok = false;
            why = strf("h%d n_skipped %d != oracle %ld", h, labels.n_skipped, skipped);
            break;
        }
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            const auto& ex = labels.examples[i];
            const auto& oc = oracle[i];
            if (ex.state != oc.state || ex.week != oc.week || ex.ht_value != oc.value ||
                ex.target.ordinal != oc.ordinal || ex.record_index != oc.record_index) {
                ok = false;
                why = strf("h%d mismatch at row %zu (%s week %d)", h, i, oc.state.c_str(), oc.week);
                break;
            }
            ++compared;
        }
    }

    // monotone dense scan over both horizons
    for (const Horizon h : {Horizon::OneWeek, Horizon::ThreeWeek}) {
        if (!ok) break;
        int prev = 0;
        for (int i = 0; i <= 20000; ++i) {
            const double v = -10.0 + 0.001 * i;
            const int ord = categorize(TrendValue{v, h}).ordinal;
            if (ord < prev) { ok = false; why = "categorize not monotone"; break; }
            prev = ord;
        }
        if (ok && prev != 5) { ok = false; why = "categorize scan did not reach class 5"; }
    }

    const double secs = elapsed_s(start);
    if (secs >= kBudget) { ok = false; why = strf("runtime %.1fs >= %.0fs", secs, kBudget); }
    report(2, ok,
           ok ? strf("50x104 panel: %ld label rows exactly match the raw-CSV oracle; "
                     "categorize monotone on 2x20001-point scan; %.1fs < 10s",
                     compared, secs)
              : why);
}

// ---------------------------------------------------------------------------
// Criterion 3 — gradient fidelity across random small configurations.

void criterion_3() {
    const auto start = Clock::now();
    const double kTol = 1e-4;
    const double kBudget = 60.0;
    bool ok = true;
    std::string why;
    double worst = 0.0;
    int configs = 0;

    // standalone encoders
    for (const EncoderKind kind :
         {EncoderKind::VanillaRNN, EncoderKind::GRU, EncoderKind::LSTM}) {
        for (const int input : {1, 2, 3})
            for (const int hidden : {2, 4, 6})
                for (const int steps : {4, 7})
                    for (const int rep : {0, 1}) {
                        const auto seed = static_cast<std::uint64_t>(
                            1000 + configs * 13 + rep + static_cast<int>(kind));
                        worst =
                            std::max(worst, grad_check_encoder(kind, input, hidden, steps, seed));
                        ++configs;
                    }
    }

    // decoder plus end-to-end loss through the full model
    const Vocab vocab = build_vocab({"alpha beta gamma", "beta gamma delta epsilon"});
    const std::string prompt = std::string("alpha beta ") + kTimeSeriesToken + " gamma delta";
    struct Dims {
        int d_model, n_heads, d_ff, n_blocks;
    };
    const std::vector<Dims> dims = {{4, 1, 8, 1}, {8, 2, 16, 1}, {4, 2, 8, 2}};
    for (const EncoderKind kind : {EncoderKind::None, EncoderKind::VanillaRNN, EncoderKind::GRU,
                                   EncoderKind::LSTM}) {
        for (const auto& dm : dims)
            for (const std::uint64_t seed : {11ull, 12ull}) {
                ModelConfig mc;
                mc.d_model = dm.d_model;
                mc.n_heads = dm.n_heads;
                mc.d_ff = dm.d_ff;
                mc.n_blocks = dm.n_blocks;
                mc.max_len = 16;
                mc.window_len = 4;
                mc.encoder = kind;
                Model model(vocab, mc, seed);
                TokenizedExample ex;
                ex.ids = tokenize(prompt, vocab);
                for (std::size_t j = 0; j < ex.ids.size(); ++j)
                    if (ex.ids[j] == Vocab::kSeries) ex.special_index = static_cast<int>(j);
                Rng rng(seed * 7 + 1);
                ex.features = Mat(4, 2);
                for (long r = 0; r < 4; ++r)
                    for (long c = 0; c < 2; ++c) ex.features(r, c) = rng.normal();
                ex.target_ordinal = 1 + configs % 5;
                worst = std::max(worst, grad_check_model(model, ex));
                ++configs;
            }
    }

    if (configs < 100) { ok = false; why = strf("only %d configurations", configs); }
    if (worst >= kTol) { ok = false; why = strf("max relative error %.3e >= 1e-4", worst); }
    const double secs = elapsed_s(start);
    if (secs >= kBudget) { ok = false; why = strf("runtime %.1fs >= %.0fs", secs, kBudget); }
    report(3, ok,
           ok ? strf("%d configurations, max relative error %.2e < 1e-4; %.1fs < 60s", configs,
                     worst, secs)
              : why);
}

// ---------------------------------------------------------------------------
// Shared small real-data setup for criteria 4 and 5.

struct SmallFit {
    Dataset ds;
    std::vector<TokenizedExample> toks;
    Model model;
};

SmallFit make_small_fit() {
    SyntheticConfig cfg;
    cfg.n_states = 6;
    cfg.n_weeks = 48;
    SmallFit out{assemble_dataset(generate_synthetic(cfg, 3), kPromptWindow), {}, {}};
    const LabelSet labels = build_labels(out.ds, Horizon::OneWeek);
    std::vector<std::string> corpus;
    std::vector<const LabeledExample*> usable;
    for (const auto& ex : labels.examples) {
        if (ex.record_index < 0) continue;
        usable.push_back(&ex);
        corpus.push_back(
            assemble_prompt(out.ds.records[static_cast<std::size_t>(ex.record_index)],
                            Horizon::OneWeek)
                .text);
        if (usable.size() == 48) break;
    }
    ModelConfig mc;
    mc.d_model = 16;
    mc.n_blocks = 1;
    mc.n_heads = 2;
    mc.d_ff = 32;
    mc.max_len = 512;
    mc.window_len = kPromptWindow;
    mc.encoder = EncoderKind::GRU;
    out.model = Model(build_vocab(corpus), mc, 5);
    for (const auto* ex : usable)
        out.toks.push_back(out.model.prepare_example(
            out.ds.records[static_cast<std::size_t>(ex->record_index)], Horizon::OneWeek,
            &ex->target));
    fit_standardization(out.model, out.toks);
    return out;
}

// Criterion 4 — frozen-body invariance over 100 optimization steps.

void criterion_4() {
    const auto start = Clock::now();
    const double kBudget = 60.0;
    bool ok = true;
    std::string why;

    SmallFit fit = make_small_fit();
    Model& model = fit.model;

    const auto is_frozen_name = [](const std::string& n) {
        return n == "pos_emb" || n.rfind("block", 0) == 0 || n.rfind("lnf_", 0) == 0;
    };
    const auto is_trainable_name = [](const std::string& n) {
        return n == "tok_emb" || n == "w_out" || n.rfind("enc.", 0) == 0;
    };
    for (const auto& p : model.params) {
        if (p.trainable != is_trainable_name(p.name) || p.trainable == is_frozen_name(p.name)) {
            ok = false;
            why = "trainable flag does not match the name partition: " + p.name;
        }
    }

    std::vector<Mat> before;
    for (const auto& p : model.params) before.push_back(p.value);

    TrainConfig tc;
    tc.steps = 100;
    tc.batch_size = 8;
    tc.lr = 1e-3;
    train(model, fit.toks, tc, 5);

    int n_frozen = 0, n_trainable = 0;
    for (std::size_t i = 0; ok && i < model.params.size(); ++i) {
        const auto& p = model.params[i];
        const bool identical = (p.value.array() == before[i].array()).all();
        if (p.trainable) {
            ++n_trainable;
            if (identical) { ok = false; why = "trainable parameter unchanged: " + p.name; }
        } else {
            ++n_frozen;
            if (!identical) { ok = false; why = "frozen parameter changed: " + p.name; }
        }
    }

    const double secs = elapsed_s(start);
    if (secs >= kBudget) { ok = false; why = strf("runtime %.1fs >= %.0fs", secs, kBudget); }
    report(4, ok,
           ok ? strf("100 steps: %d frozen params bitwise unchanged, %d trainable params all "
                     "updated; %.1fs < 60s",
                     n_frozen, n_trainable, secs)
              : why);
}

// Criterion 5 — injection locality and distribution invariants.

void criterion_5() {
    bool ok = true;
    std::string why;

    SmallFit fit = make_small_fit();
    const Model& model = fit.model;
    const TokenizedExample& ex = fit.toks.front();
    if (ex.special_index < 0) { ok = false; why = "example lacks a series token"; }

    // H' = inject(H): only the special-token row may change, and it must
    // equal the encoder output exactly
    if (ok) {
        Model::TapeCtx ctx;
        Var h = model.embed(ctx, ex.ids);
        const Mat H = ctx.tape.value(h);
        Var z = model.encode(ctx, ex.features);
        const Mat Z = ctx.tape.value(z);
        Var hp = ctx.tape.set_row(h, z, ex.special_index);
        const Mat Hp = ctx.tape.value(hp);
        for (long r = 0; ok && r < H.rows(); ++r) {
            const bool same = (H.row(r).array() == Hp.row(r).array()).all();
            if (r == ex.special_index) {
                if (!(Hp.row(r).array() == Z.row(0).array()).all()) {
                    ok = false;
                    why = "injected row is not the encoder output";
                }
                if (same) { ok = false; why = "injection did not change the special row"; }
            } else if (!same) {
                ok = false;
                why = strf("row %ld changed by injection", r);
            }
        }
    }

    // every emitted distribution sums to 1 +- 1e-9
    double worst_sum = 0.0;
    if (ok) {
        Rng rng(77);
        const int V = model.vocab.size();
        for (int trial = 0; trial < 400; ++trial) {
            Mat logits(1, V);
            for (int j = 0; j < V; ++j) logits(0, j) = rng.normal(0.0, 5.0);
            const Probs p = model.class_distribution(logits);
            double s = 0.0;
            for (double v : p) s += v;
            worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        }
        for (std::size_t i = 0; i < fit.toks.size(); i += 7) {
            const Probs p = model.predict_example(fit.toks[i]);
            double s = 0.0;
            for (double v : p) s += v;
            worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        }
        if (worst_sum > 1e-9) { ok = false; why = strf("distribution sum off by %.2e", worst_sum); }
    }

    // softmax shift invariance
    double worst_shift = 0.0;
    if (ok) {
        Rng rng(78);
        const int V = model.vocab.size();
        for (int trial = 0; trial < 100; ++trial) {
            Mat logits(1, V);
            for (int j = 0; j < V; ++j) logits(0, j) = rng.normal(0.0, 3.0);
            const Probs p0 = model.class_distribution(logits);
            for (const double c : {-40.0, 12.5, 40.0}) {
                Mat shifted = logits;
                shifted.array() += c;
                const Probs p1 = model.class_distribution(shifted);
                for (int k = 0; k < kNumClasses; ++k)
                    worst_shift = std::max(
                        worst_shift, std::abs(p0[static_cast<std::size_t>(k)] -
                                              p1[static_cast<std::size_t>(k)]));
            }
        }
        if (worst_shift > 1e-12) { ok = false; why = strf("shift gap %.2e > 1e-12", worst_shift); }
    }

    report(5, ok,
           ok ? strf("injection touches only the special row; max |sum-1| = %.1e <= 1e-9; "
                     "shift invariance gap %.1e <= 1e-12",
                     worst_sum, worst_shift)
              : why);
}

// ---------------------------------------------------------------------------
// Criterion 6 — golden prompt files.

void criterion_6() {
    bool ok = true;
    std::string why;

    SyntheticConfig cfg;
    cfg.n_states = 8;
    cfg.n_weeks = 60;
    const Dataset ds = assemble_dataset(generate_synthetic(cfg, 2024), 12);
    const auto rec_at = [&](int state_pos, int week) -> const DataRecord& {
        const int idx =
            ds.record_index(ds.panels.states[static_cast<std::size_t>(state_pos)].code, week);
        return ds.records[static_cast<std::size_t>(idx)];
    };
    const std::string fixture_dir = std::string(EPICAST_TEST_DIR) + "/fixtures/";

    const DataRecord& r1 = rec_at(1, 20);
    const PromptDocument d1 = assemble_prompt(r1, Horizon::OneWeek, nullptr);
    const PromptDocument d2 = assemble_prompt(rec_at(4, 50), Horizon::ThreeWeek, nullptr);
    std::vector<double> hr3;
    for (const auto& p : ds.panels.epi.at(rec_at(6, 30).state.code).points)
        hr3.push_back(p.hosp_rate);
    const HtcClass target3 = categorize(hosp_trend(hr3, 30, Horizon::OneWeek));
    const PromptDocument d3 = assemble_prompt(rec_at(6, 30), Horizon::OneWeek, &target3);

    const std::vector<std::pair<const PromptDocument*, std::string>> goldens = {
        {&d1, "golden_prompt_1.txt"}, {&d2, "golden_prompt_2.txt"}, {&d3, "golden_prompt_3.txt"}};
    for (const auto& [doc, name] : goldens) {
        if (doc->text != slurp(fixture_dir + name)) {
            ok = false;
            why = name + " is not byte-identical";
        }
        int occurrences = 0;
        for (std::size_t at = doc->text.find(kTimeSeriesToken); at != std::string::npos;
             at = doc->text.find(kTimeSeriesToken, at + 1))
            ++occurrences;
        if (occurrences != 1) { ok = false; why = name + ": special token count != 1"; }
        if (doc->word_count < 250 || doc->word_count > 400) {
            ok = false;
            why = strf("%s: word_count %d outside [250, 400]", name.c_str(), doc->word_count);
        }
    }

    // the genomic toggle must remove exactly the genomic paragraph
    DataRecord r1ng = r1;
    r1ng.include_genomic = false;
    const PromptDocument d1ng = assemble_prompt(r1ng, Horizon::OneWeek, nullptr);
    if (d1ng.text != slurp(fixture_dir + "golden_prompt_1_nogenomic.txt")) {
        ok = false;
        why = "golden_prompt_1_nogenomic.txt is not byte-identical";
    }
    const std::string genomic = genomic_text(r1.genomic, true);
    std::string reduced = d1.text;
    const std::size_t at = reduced.find("\n\n" + genomic);
    if (at == std::string::npos) {
        ok = false;
        why = "genomic paragraph not found in the with-genomic prompt";
    } else {
        reduced.erase(at, genomic.size() + 2);
        if (reduced != d1ng.text) { ok = false; why = "toggle changed more than the genomic paragraph"; }
    }

    report(6, ok,
           ok ? strf("3 goldens + no-genomic variant byte-identical; one special token each; "
                     "word counts %d/%d/%d in [250, 400]; toggle removes only the genomic "
                     "paragraph",
                     d1.word_count, d2.word_count, d3.word_count)
              : why);
}

// ---------------------------------------------------------------------------
// Criteria 7 and 8 — learning smoke and the encoder ablation direction,
// sharing one 20x80 scenario and the trained GRU arms.

void criteria_7_and_8() {
    const auto start = Clock::now();
    const double kBudget7 = 600.0;
    const double kBudget8 = 1200.0; // combined budget for both criteria

    RunConfig run; // default synthetic scenario: 20 states x 80 weeks
    run.synth.n_states = 20;
    run.synth.n_weeks = 80;
    const Dataset ds = assemble_dataset(generate_synthetic(run.synth, run.seed), kPromptWindow);
    const SplitPlan plan = resolve_split(run, panel_weeks(ds));
    const LabelSet labels = build_labels(ds, Horizon::OneWeek);
    const HorizonSplit split = split_examples(labels, plan, run.split, Horizon::OneWeek);

    // PrevTrend accuracy over the same held-out examples
    std::vector<std::string> codes;
    for (const auto& s : ds.panels.states) codes.push_back(s.code);
    std::map<int, Probs> pt_by_week;
    std::vector<int> preds, truths;
    for (const auto& ex : split.test) {
        if (!pt_by_week.count(ex.week)) {
            std::vector<HtcClass> realized;
            for (const auto& code : codes)
                realized.push_back(realized_class(hr_series(ds, code), ex.week, Horizon::OneWeek));
            pt_by_week[ex.week] = prevtrend(realized);
        }
        preds.push_back(argmax_class(pt_by_week[ex.week]));
        truths.push_back(ex.target.ordinal);
    }
    const double pt_acc = accuracy(preds, truths);

    const auto arm_accuracy = [&](EncoderKind kind, std::uint64_t seed) {
        const Model model = train_main_model(ds, split.train, Horizon::OneWeek, kind, run.model,
                                             run.train, seed, "acceptance");
        return holdout_accuracy(model, ds, split.test, Horizon::OneWeek);
    };

    std::vector<double> gru_accs;
    for (const std::uint64_t seed : {1ull, 2ull, 3ull})
        gru_accs.push_back(arm_accuracy(EncoderKind::GRU, seed));
    const double gru_med = median3(gru_accs);
    const double secs7 = elapsed_s(start);

    {
        bool ok = true;
        std::string why;
        if (gru_med - pt_acc < 0.05)
            { ok = false; why = strf("median GRU %.4f vs PrevTrend %.4f: margin %.4f < 0.05",
                                     gru_med, pt_acc, gru_med - pt_acc); }
        if (secs7 >= kBudget7) { ok = false; why = strf("runtime %.0fs >= 600s", secs7); }
        report(7, ok,
               ok ? strf("median GRU accuracy %.4f vs PrevTrend %.4f (margin %.4f >= 0.05, "
                         "3 seeds); %.0fs < 600s",
                         gru_med, pt_acc, gru_med - pt_acc, secs7)
                  : why);
    }

    std::vector<double> none_accs;
    for (const std::uint64_t seed : {1ull, 2ull, 3ull})
        none_accs.push_back(arm_accuracy(EncoderKind::None, seed));
    const double none_med = median3(none_accs);
    const double secs8 = elapsed_s(start);

    {
        bool ok = true;
        std::string why;
        if (none_med <= 0.0 || gru_med < 1.05 * none_med)
            { ok = false; why = strf("median GRU %.4f vs no-encoder %.4f: relative gain %.1f%% < 5%%",
                                     gru_med, none_med, 100.0 * (gru_med / none_med - 1.0)); }
        if (secs8 >= kBudget8) { ok = false; why = strf("combined runtime %.0fs >= 1200s", secs8); }
        report(8, ok,
               ok ? strf("median GRU %.4f vs no-encoder %.4f (relative gain %.1f%% >= 5%%, "
                         "3 seeds); combined %.0fs < 1200s",
                         gru_med, none_med, 100.0 * (gru_med / none_med - 1.0), secs8)
                  : why);
    }
}

// ---------------------------------------------------------------------------
// Criterion 9 — PrevTrend equals a counting oracle exactly.

void criterion_9() {
    bool ok = true;
    std::string why;
    Rng rng(909);
    for (int trial = 0; ok && trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform() * 60.0) % 60;
        std::vector<HtcClass> realized;
        long counts[6] = {0, 0, 0, 0, 0, 0};
        for (int i = 0; i < n; ++i) {
            const int ord = 1 + static_cast<int>(rng.uniform() * 5.0) % 5;
            realized.push_back({ord});
            ++counts[ord];
        }
        const Probs p = prevtrend(realized);
        for (int k = 1; k <= 5; ++k)
            if (p[static_cast<std::size_t>(k - 1)] !=
                static_cast<double>(counts[k]) / static_cast<double>(n)) {
                ok = false;
                why = strf("trial %d: class %d probability differs from count/n", trial, k);
            }
    }
    report(9, ok, ok ? "300 random rosters: distribution equals category frequencies exactly" : why);
}

// ---------------------------------------------------------------------------
// Criterion 10 — byte-identical artifacts across two full pipeline runs.

void criterion_10() {
    const auto start = Clock::now();
    bool ok = true;
    std::string why;

    TempTree tmp("determinism");
    const std::string cfg_path = tmp.str() + "/config.json";
    {
        std::ofstream out(cfg_path);
        out << R"({
  "synthetic": {"n_states": 6, "n_weeks": 48},
  "horizons": [1],
  "model": {"d_model": 32, "n_blocks": 1, "n_heads": 2, "d_ff": 64},
  "train": {"steps": 50, "batch_size": 8, "lr": 0.001},
  "classifier": {"hidden": 8, "steps": 40, "batch_size": 8, "lr": 0.01},
  "seeds": [1],
  "seed": 1,
  "out_dir": "unused"
})";
    }

    const LoadedConfig base = load_run_config(cfg_path);
    const std::string dir_a = tmp.str() + "/run_a";
    const std::string dir_b = tmp.str() + "/run_b";
    for (const std::string& dir : {dir_a, dir_b}) {
        LoadedConfig lc = base;
        lc.run.out_dir = dir;
        cmd_prompts(lc);
        cmd_train(lc);
        cmd_predict(lc);
        cmd_eval(lc);
    }

    std::vector<std::string> checked;
    for (const char* rel : {"prompts.jsonl", "forecasts.jsonl", "metrics.json"}) {
        if (!files_equal(dir_a + "/" + rel, dir_b + "/" + rel)) {
            ok = false;
            why = std::string(rel) + " differs between runs";
        }
        checked.push_back(rel);
    }
    std::set<std::string> bundles_a, bundles_b;
    for (const auto& e : fs::directory_iterator(dir_a + "/models"))
        bundles_a.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(dir_b + "/models"))
        bundles_b.insert(e.path().filename().string());
    if (bundles_a != bundles_b || bundles_a.empty()) {
        ok = false;
        why = "bundle sets differ between runs";
    } else {
        for (const auto& name : bundles_a) {
            if (!files_equal(dir_a + "/models/" + name, dir_b + "/models/" + name)) {
                ok = false;
                why = "models/" + name + " differs between runs";
            }
            checked.push_back("models/" + name);
        }
    }

    report(10, ok,
           ok ? strf("two full runs byte-identical across %zu artifacts "
                     "(prompts.jsonl, %zu bundles, forecasts.jsonl, metrics.json); %.0fs",
                     checked.size(), bundles_a.size(), elapsed_s(start))
              : why);
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criteria_7_and_8();
    criterion_9();
    criterion_10();
    std::printf("%s\n", g_failed == 0 ? "acceptance: all criteria passed"
                                      : strf("acceptance: %d criteria FAILED", g_failed).c_str());
    return g_failed == 0 ? 0 : 1;
}
