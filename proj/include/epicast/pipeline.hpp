#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "epicast/baselines.hpp"
#include "epicast/config.hpp"
#include "epicast/dataset.hpp"
#include "epicast/metrics.hpp"
#include "epicast/model.hpp"
#include "epicast/svg.hpp"
#include "epicast/synthetic.hpp"
#include "epicast/targets.hpp"
#include "epicast/textualizer.hpp"
#include "epicast/train.hpp"
#include "epicast/vocab.hpp"

namespace epicast {

inline constexpr int kPromptWindow = 12; ///< trailing weeks summarized per prompt

// --- small utilities --------------------------------------------------------------

inline void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) fail(Errc::IoError, "cannot create directory " + path + ": " + ec.message());
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    out << content;
    if (!out) fail(Errc::IoError, "failed writing " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Report numbers carry 12 significant digits.
inline std::string num12(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// Worker cap: EPICAST_THREADS when set, hardware concurrency otherwise.
inline int worker_count() {
    int n = 0;
    if (const char* env = std::getenv("EPICAST_THREADS")) n = std::atoi(env);
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    return std::min(std::max(n, 1), 64);
}

/// Index-parallel map with deterministic output: fn(i) fills slot i only.
template <typename Fn>
void parallel_for(long n, Fn&& fn) {
    const int workers = static_cast<int>(std::max<long>(1, std::min<long>(worker_count(), n)));
    if (workers <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error = nullptr;
    std::mutex err_mu;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (long i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// --- manifests ----------------------------------------------------------------------

/// Per-command manifest: config hash, seeds, tool version, artifact map.
/// No timestamps, so reruns are byte-identical.
inline void write_manifest(const LoadedConfig& lc, const std::string& command,
                           const std::vector<std::pair<std::string, std::string>>& artifacts,
                           const std::vector<std::pair<std::string, std::string>>& notes = {}) {
    nlohmann::json m;
    m["schema_version"] = 1;
    m["tool_version"] = kVersion;
    m["command"] = command;
    m["config_hash"] = lc.hash;
    m["seed"] = lc.run.seed;
    m["seeds"] = lc.run.seeds;
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, path] : artifacts) files[name] = path;
    m["artifacts"] = files;
    nlohmann::json extra = nlohmann::json::object();
    for (const auto& [k, v] : notes) extra[k] = v;
    m["notes"] = extra;
    ensure_dir(lc.run.out_dir);
    write_text_file(lc.run.out_dir + "/manifest_" + command + ".json", m.dump(2) + "\n");
}

// --- data acquisition and splitting ---------------------------------------------------

inline Dataset acquire_data(const RunConfig& run) {
    PanelSet panels = run.data_dir.empty() ? generate_synthetic(run.synth, run.seed)
                                           : load_panels(run.data_dir);
    Dataset ds = assemble_dataset(std::move(panels), kPromptWindow);
    for (auto& rec : ds.records) rec.include_genomic = run.include_genomic;
    return ds;
}

inline int panel_weeks(const Dataset& ds) {
    return ds.panels.epi.at(ds.panels.states.front().code).n_weeks();
}

struct SplitPlan {
    int test_start = 0; ///< first held-out week (inclusive)
    int train_end = 0;  ///< training examples must have issue week < train_end
};

inline SplitPlan resolve_split(const RunConfig& run, int n_weeks) {
    SplitPlan plan;
    plan.test_start =
        run.split.test_start_week >= 0 ? run.split.test_start_week : n_weeks - 16;
    if (plan.test_start < 1 || plan.test_start >= n_weeks)
        fail(Errc::InvalidConfig, "test window must lie inside the panel (test_start_week=" +
                                      std::to_string(plan.test_start) + ", n_weeks=" +
                                      std::to_string(n_weeks) + ")");
    plan.train_end =
        run.split.train_end_week >= 0 ? run.split.train_end_week : plan.test_start - 3;
    if (plan.train_end < 1 || plan.train_end > n_weeks)
        fail(Errc::InvalidConfig, "train_end_week out of range");
    return plan;
}

struct HorizonSplit {
    std::vector<LabeledExample> train, val, test;
};

/// Temporal holdout plus a seeded 80/20 shuffle of the pre-test pool.
/// Leakage guard: no training target may fall inside the test window.
inline HorizonSplit split_examples(const LabelSet& labels, const SplitPlan& plan,
                                   const SplitSpec& spec, Horizon h) {
    const int hw = horizon_weeks(h);
    std::vector<LabeledExample> pool;
    HorizonSplit out;
    for (const auto& ex : labels.examples) {
        if (ex.week >= plan.test_start)
            out.test.push_back(ex);
        else if (ex.week < plan.train_end)
            pool.push_back(ex);
    }
    for (const auto& ex : pool)
        if (ex.week + hw >= plan.test_start)
            fail(Errc::SplitLeakage, "training example at week " + std::to_string(ex.week) +
                                         " has its target at week " + std::to_string(ex.week + hw) +
                                         " inside the test window starting at week " +
                                         std::to_string(plan.test_start));
    if (pool.empty()) fail(Errc::EmptyInput, "empty training pool for this split");
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(spec.split_seed * 1000003ull + static_cast<std::uint64_t>(hw));
    rng.shuffle(idx);
    const auto n_train = std::min<std::size_t>(
        idx.size(), static_cast<std::size_t>(std::max<long>(
                        1, std::lround(spec.train_ratio * static_cast<double>(pool.size())))));
    std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + static_cast<long>(n_train));
    std::vector<std::size_t> val_idx(idx.begin() + static_cast<long>(n_train), idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    for (auto i : train_idx) out.train.push_back(pool[i]);
    for (auto i : val_idx) out.val.push_back(pool[i]);
    return out;
}

inline std::vector<double> hr_series(const Dataset& ds, const std::string& code) {
    const auto& pts = ds.panels.epi.at(code).points;
    std::vector<double> hr(pts.size());
    for (std::size_t i = 0; i < hr.size(); ++i) hr[i] = pts[i].hosp_rate;
    return hr;
}

// --- model ids -------------------------------------------------------------------------

inline std::string main_model_id(EncoderKind k) {
    return std::string("epicast-") + encoder_kind_name(k);
}

// --- command: synth ---------------------------------------------------------------------

inline void cmd_synth(const LoadedConfig& lc) {
    const auto& run = lc.run;
    const PanelSet panels = generate_synthetic(run.synth, run.seed);
    const std::string data_dir = run.out_dir + "/data";
    ensure_dir(data_dir);
    write_panels(data_dir, panels);
    write_manifest(lc, "synth",
                   {{"epi", "data/epi.csv"},
                    {"spatial", "data/spatial.csv"},
                    {"policy", "data/policy.csv"},
                    {"genomic", "data/genomic.csv"}},
                   {{"n_states", std::to_string(run.synth.n_states)},
                    {"n_weeks", std::to_string(run.synth.n_weeks)}});
}

// --- command: ingest --------------------------------------------------------------------

inline void cmd_ingest(const LoadedConfig& lc) {
    const Dataset ds = acquire_data(lc.run);
    nlohmann::json summary;
    summary["schema_version"] = 1;
    summary["n_states"] = ds.panels.states.size();
    summary["n_weeks"] = panel_weeks(ds);
    summary["n_records"] = ds.records.size();
    summary["window_len"] = ds.window_len;
    std::vector<std::string> codes;
    for (const auto& s : ds.panels.states) codes.push_back(s.code);
    summary["states"] = codes;
    ensure_dir(lc.run.out_dir);
    write_text_file(lc.run.out_dir + "/dataset_summary.json", summary.dump(2) + "\n");
    write_manifest(lc, "ingest", {{"dataset_summary", "dataset_summary.json"}});
}

// --- command: labels --------------------------------------------------------------------

inline void cmd_labels(const LoadedConfig& lc) {
    const Dataset ds = acquire_data(lc.run);
    std::vector<LabeledExample> all;
    long skipped = 0;
    for (int h : lc.run.horizons) {
        const LabelSet ls = build_labels(ds, horizon_from_int(h));
        all.insert(all.end(), ls.examples.begin(), ls.examples.end());
        skipped += ls.n_skipped;
    }
    ensure_dir(lc.run.out_dir);
    write_labels_csv(lc.run.out_dir + "/labels.csv", all);
    write_manifest(lc, "labels", {{"labels", "labels.csv"}},
                   {{"n_examples", std::to_string(all.size())},
                    {"n_skipped", std::to_string(skipped)}});
}

// --- command: prompts -------------------------------------------------------------------

inline std::string prompt_jsonl_line(const LabeledExample& ex, const PromptDocument& doc) {
    nlohmann::json j;
    j["horizon"] = horizon_weeks(ex.horizon);
    j["special_token_index"] = doc.special_token_index;
    j["state"] = ex.state;
    j["target"] = doc.target_token;
    j["text"] = doc.text;
    j["week_index"] = ex.week;
    j["word_count"] = doc.word_count;
    return j.dump();
}

inline void cmd_prompts(const LoadedConfig& lc) {
    const Dataset ds = acquire_data(lc.run);
    ensure_dir(lc.run.out_dir);
    std::ofstream out(lc.run.out_dir + "/prompts.jsonl", std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot write prompts.jsonl");
    long n = 0;
    for (int h : lc.run.horizons) {
        const Horizon hz = horizon_from_int(h);
        const LabelSet ls = build_labels(ds, hz);
        for (const auto& ex : ls.examples) {
            if (ex.record_index < 0) continue; // issue week predates the first full window
            const auto& rec = ds.records[static_cast<std::size_t>(ex.record_index)];
            const PromptDocument doc = assemble_prompt(rec, hz, &ex.target);
            out << prompt_jsonl_line(ex, doc) << "\n";
            ++n;
        }
    }
    out.flush();
    if (!out) fail(Errc::IoError, "failed writing prompts.jsonl");
    write_manifest(lc, "prompts", {{"prompts", "prompts.jsonl"}},
                   {{"n_prompts", std::to_string(n)}});
}

// --- command: train ---------------------------------------------------------------------

/// Trains the injected-encoder model on the given examples; vocab comes from
/// the training prompts only (no test leakage).
inline Model train_main_model(const Dataset& ds, const std::vector<LabeledExample>& train_exs,
                              Horizon h, EncoderKind encoder, const ModelConfig& base_cfg,
                              const TrainConfig& tc, std::uint64_t seed,
                              const std::string& config_hash, std::ostream* log = nullptr) {
    std::vector<std::string> corpus;
    std::vector<const LabeledExample*> usable;
    for (const auto& ex : train_exs) {
        if (ex.record_index < 0) continue;
        usable.push_back(&ex);
        corpus.push_back(
            assemble_prompt(ds.records[static_cast<std::size_t>(ex.record_index)], h).text);
    }
    if (usable.empty()) fail(Errc::EmptyInput, "no trainable examples with full windows");
    ModelConfig mcfg = base_cfg;
    mcfg.window_len = ds.window_len;
    mcfg.horizon = horizon_weeks(h);
    mcfg.encoder = encoder;
    Model model(build_vocab(corpus), mcfg, seed);
    model.config_hash = config_hash;
    std::vector<TokenizedExample> toks;
    toks.reserve(usable.size());
    for (const auto* ex : usable)
        toks.push_back(model.prepare_example(
            ds.records[static_cast<std::size_t>(ex->record_index)], h, &ex->target));
    fit_standardization(model, toks);
    train(model, toks, tc, seed, log);
    return model;
}

/// Predicts class distributions for labeled examples (skipping any without a
/// full feature window) and returns (dists, truths) aligned pairs.
inline std::pair<std::vector<Probs>, std::vector<int>> model_test_forecasts(
    const Model& model, const Dataset& ds, const std::vector<LabeledExample>& exs, Horizon h) {
    std::vector<Probs> dists(exs.size());
    std::vector<char> ok(exs.size(), 0);
    parallel_for(static_cast<long>(exs.size()), [&](long i) {
        const auto& ex = exs[static_cast<std::size_t>(i)];
        if (ex.record_index < 0) return;
        dists[static_cast<std::size_t>(i)] = model.predict_example(model.prepare_example(
            ds.records[static_cast<std::size_t>(ex.record_index)], h, nullptr));
        ok[static_cast<std::size_t>(i)] = 1;
    });
    std::pair<std::vector<Probs>, std::vector<int>> out;
    for (std::size_t i = 0; i < exs.size(); ++i) {
        if (!ok[i]) continue;
        out.first.push_back(dists[i]);
        out.second.push_back(exs[i].target.ordinal);
    }
    return out;
}

inline double holdout_accuracy(const Model& model, const Dataset& ds,
                               const std::vector<LabeledExample>& exs, Horizon h) {
    const auto [dists, truths] = model_test_forecasts(model, ds, exs, h);
    if (dists.empty()) return 0.0;
    std::vector<int> preds(dists.size());
    for (std::size_t i = 0; i < dists.size(); ++i) preds[i] = argmax_class(dists[i]);
    return accuracy(preds, truths);
}

inline void cmd_train(const LoadedConfig& lc) {
    const auto& run = lc.run;
    const Dataset ds = acquire_data(run);
    const SplitPlan plan = resolve_split(run, panel_weeks(ds));
    ensure_dir(run.out_dir + "/models");
    ensure_dir(run.out_dir + "/logs");
    std::vector<std::pair<std::string, std::string>> artifacts;
    std::vector<std::pair<std::string, std::string>> notes;
    for (int h : run.horizons) {
        const Horizon hz = horizon_from_int(h);
        const LabelSet labels = build_labels(ds, hz);
        const HorizonSplit split = split_examples(labels, plan, run.split, hz);
        const std::string tag = "h" + std::to_string(h);

        std::ofstream log(run.out_dir + "/logs/main_" + tag + ".jsonl", std::ios::binary);
        Model model = train_main_model(ds, split.train, hz, run.model.encoder, run.model,
                                       run.train, run.seed, lc.hash, &log);
        const std::string bundle = "models/main_" + tag + ".bundle";
        model.save(run.out_dir + "/" + bundle);
        artifacts.emplace_back("main_" + tag, bundle);
        artifacts.emplace_back("log_main_" + tag, "logs/main_" + tag + ".jsonl");
        notes.emplace_back("val_accuracy_" + tag,
                           num12(holdout_accuracy(model, ds, split.val, hz)));
        notes.emplace_back("n_train_" + tag, std::to_string(split.train.size()));
        notes.emplace_back("n_val_" + tag, std::to_string(split.val.size()));
        notes.emplace_back("n_test_" + tag, std::to_string(split.test.size()));

        // numeric-window reference classifiers
        std::vector<SeqExample> seq;
        for (const auto& ex : split.train) {
            if (ex.record_index < 0) continue;
            seq.push_back({seq_features(ds.records[static_cast<std::size_t>(ex.record_index)]),
                           ex.target.ordinal});
        }
        for (SeqKind kind : {SeqKind::GRU, SeqKind::LSTM, SeqKind::BiLSTM}) {
            const SeqClassifier clf = train_seq_classifier(kind, seq, run.classifier, run.seed);
            const std::string path = std::string("models/") + seq_kind_name(kind) + "_" + tag +
                                     ".bundle";
            save_seq_classifier(clf, run.out_dir + "/" + path);
            artifacts.emplace_back(std::string(seq_kind_name(kind)) + "_" + tag, path);
        }
    }
    write_manifest(lc, "train", artifacts, notes);
}

// --- command: predict -------------------------------------------------------------------

struct ForecastRow {
    std::string model_id;
    std::string state;
    int week = 0;
    int horizon = 1;
    bool probabilistic = true;
    Probs probs{};
    int point_class = 3;
};

inline std::string forecast_jsonl_line(const ForecastRow& row) {
    nlohmann::json j;
    j["horizon"] = row.horizon;
    j["model_id"] = row.model_id;
    if (row.probabilistic) {
        j["probs"] = std::vector<double>(row.probs.begin(), row.probs.end());
    } else {
        j["point_class"] = row.point_class;
    }
    j["state"] = row.state;
    j["week_index"] = row.week;
    return j.dump();
}

inline ForecastRow parse_forecast_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, std::string("forecasts.jsonl: ") + e.what());
    }
    ForecastRow row;
    try {
        row.model_id = j.at("model_id").get<std::string>();
        row.state = j.at("state").get<std::string>();
        row.week = j.at("week_index").get<int>();
        row.horizon = j.at("horizon").get<int>();
        if (j.contains("probs")) {
            const auto v = j.at("probs").get<std::vector<double>>();
            if (v.size() != kNumClasses) fail(Errc::ParseError, "probs must have 5 entries");
            std::copy(v.begin(), v.end(), row.probs.begin());
            row.probabilistic = true;
        } else {
            row.point_class = j.at("point_class").get<int>();
            row.probabilistic = false;
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, std::string("forecasts.jsonl row: ") + e.what());
    }
    return row;
}

inline void cmd_predict(const LoadedConfig& lc) {
    const auto& run = lc.run;
    const Dataset ds = acquire_data(run);
    const int n_weeks = panel_weeks(ds);
    const SplitPlan plan = resolve_split(run, n_weeks);

    std::vector<std::string> codes;
    for (const auto& s : ds.panels.states) codes.push_back(s.code);
    std::vector<int> test_weeks;
    for (int w = plan.test_start; w < n_weeks; ++w) test_weeks.push_back(w);

    ensure_dir(run.out_dir);
    std::ofstream out(run.out_dir + "/forecasts.jsonl", std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot write forecasts.jsonl");

    for (int h : run.horizons) {
        const Horizon hz = horizon_from_int(h);
        const std::string tag = "h" + std::to_string(h);
        const Model model = Model::load(run.out_dir + "/models/main_" + tag + ".bundle");
        std::map<SeqKind, SeqClassifier> classifiers;
        for (SeqKind kind : {SeqKind::GRU, SeqKind::LSTM, SeqKind::BiLSTM})
            classifiers[kind] = load_seq_classifier(run.out_dir + "/models/" +
                                                    seq_kind_name(kind) + "_" + tag + ".bundle");

        // (week, state) grid of records for the test window
        struct Cell {
            int week;
            const DataRecord* rec;
        };
        std::vector<Cell> grid;
        for (int w : test_weeks)
            for (const auto& code : codes) {
                const int ri = ds.record_index(code, w);
                if (ri < 0) fail(Errc::InsufficientHistory, "test week lacks a full window");
                grid.push_back({w, &ds.records[static_cast<std::size_t>(ri)]});
            }

        // main model, fanned out across workers
        std::vector<Probs> main_probs(grid.size());
        parallel_for(static_cast<long>(grid.size()), [&](long i) {
            main_probs[static_cast<std::size_t>(i)] =
                model.predict(*grid[static_cast<std::size_t>(i)].rec);
        });
        const std::string main_id = main_model_id(model.cfg.encoder);
        for (std::size_t i = 0; i < grid.size(); ++i)
            out << forecast_jsonl_line({main_id, grid[i].rec->state.code, grid[i].week, h, true,
                                        main_probs[i], 0})
                << "\n";

        // PrevTrend: one shared distribution per issue week
        for (int w : test_weeks) {
            std::vector<HtcClass> realized;
            for (const auto& code : codes)
                realized.push_back(realized_class(hr_series(ds, code), w, hz));
            const Probs p = prevtrend(realized);
            for (const auto& code : codes)
                out << forecast_jsonl_line({"prevtrend", code, w, h, true, p, 0}) << "\n";
        }

        // sequence classifiers
        for (SeqKind kind : {SeqKind::GRU, SeqKind::LSTM, SeqKind::BiLSTM}) {
            const auto& clf = classifiers.at(kind);
            std::vector<Probs> probs(grid.size());
            parallel_for(static_cast<long>(grid.size()), [&](long i) {
                probs[static_cast<std::size_t>(i)] =
                    clf.predict(seq_features(*grid[static_cast<std::size_t>(i)].rec));
            });
            for (std::size_t i = 0; i < grid.size(); ++i)
                out << forecast_jsonl_line({seq_kind_name(kind), grid[i].rec->state.code,
                                            grid[i].week, h, true, probs[i], 0})
                    << "\n";
        }

        // autoregressive point forecaster, fit per state on history up to the issue week
        for (int w : test_weeks)
            for (const auto& code : codes) {
                const auto hr = hr_series(ds, code);
                const std::vector<double> past(hr.begin(), hr.begin() + w + 1);
                const ArCoefficients ar = ar_fit(past);
                out << forecast_jsonl_line(
                           {"ar", code, w, h, false, {}, ar_class(ar, past, hz).ordinal})
                    << "\n";
            }
    }
    out.flush();
    if (!out) fail(Errc::IoError, "failed writing forecasts.jsonl");
    write_manifest(lc, "predict", {{"forecasts", "forecasts.jsonl"}},
                   {{"test_start", std::to_string(plan.test_start)},
                    {"n_test_weeks", std::to_string(test_weeks.size())}});
}

// --- command: eval ----------------------------------------------------------------------

struct ModelScores {
    std::vector<Probs> dists; ///< probabilistic rows only
    std::vector<int> dist_truths;
    std::vector<int> point_preds; ///< point rows only
    std::vector<int> point_truths;
    std::vector<std::string> states; ///< per scored example (both kinds)
    std::vector<int> weeks;
    std::vector<int> preds; ///< argmax or point
    std::vector<int> truths;
    bool probabilistic = true;
};

inline MetricAggregate scores_aggregate(const ModelScores& s) {
    if (s.probabilistic) return compute_aggregate(s.dists, s.dist_truths);
    return compute_point_aggregate(s.point_preds, s.point_truths);
}

inline std::string aggregate_json(const MetricAggregate& a) {
    std::string out = "{\"accuracy\":" + num12(a.accuracy) + ",\"mse\":" + num12(a.mse);
    if (a.probabilistic)
        out += ",\"wmse\":" + num12(a.wmse) + ",\"brier\":" + num12(a.brier) +
               ",\"rps\":" + num12(a.rps);
    out += ",\"n\":" + std::to_string(a.n) + "}";
    return out;
}

inline std::string ranks_json(const std::map<std::string, ModelRanks>& ranks) {
    std::string out = "{";
    bool first = true;
    for (const auto& [id, r] : ranks) {
        if (!first) out += ",";
        first = false;
        out += "\"" + id + "\":{";
        bool first_f = true;
        for (const char* metric : metric_names()) {
            const auto it = r.per_metric.find(metric);
            if (it == r.per_metric.end()) continue;
            if (!first_f) out += ",";
            first_f = false;
            out += "\"" + std::string(metric) + "\":" + std::to_string(it->second);
        }
        if (!first_f) out += ",";
        out += "\"average_rank\":" + num12(r.average_rank) + "}";
    }
    out += "}";
    return out;
}

/// metrics.json is assembled by hand so every number is serialized with
/// exactly 12 significant digits.
inline std::string metrics_json_text(
    const std::map<int, std::map<std::string, ModelScores>>& by_horizon,
    const std::vector<double>& thresholds) {
    std::string out = "{\n  \"schema_version\": 1,\n  \"horizons\": {\n";
    bool first_h = true;
    for (const auto& [h, models] : by_horizon) {
        if (!first_h) out += ",\n";
        first_h = false;
        out += "    \"" + std::to_string(h) + "\": {\n      \"models\": {\n";
        std::vector<std::pair<std::string, MetricAggregate>> overall;
        bool first_m = true;
        for (const auto& [id, scores] : models) {
            if (!first_m) out += ",\n";
            first_m = false;
            const MetricAggregate agg = scores_aggregate(scores);
            overall.emplace_back(id, agg);
            out += "        \"" + id + "\": {\n";
            out += "          \"overall\": " + aggregate_json(agg) + ",\n";

            // by_state / by_week sub-aggregates
            const auto group_json = [&](bool by_state) {
                std::map<std::string, ModelScores> groups;
                for (std::size_t i = 0; i < scores.preds.size(); ++i) {
                    const std::string key =
                        by_state ? scores.states[i] : std::to_string(scores.weeks[i]);
                    auto& g = groups[key];
                    g.probabilistic = scores.probabilistic;
                    if (scores.probabilistic) {
                        g.dists.push_back(scores.dists[i]);
                        g.dist_truths.push_back(scores.dist_truths[i]);
                    } else {
                        g.point_preds.push_back(scores.point_preds[i]);
                        g.point_truths.push_back(scores.point_truths[i]);
                    }
                }
                std::vector<std::pair<std::string, std::string>> rendered;
                for (const auto& [key, g] : groups)
                    rendered.emplace_back(key, aggregate_json(scores_aggregate(g)));
                if (!by_state) // numeric week keys sort numerically
                    std::sort(rendered.begin(), rendered.end(),
                              [](const auto& a, const auto& b) {
                                  return std::stoi(a.first) < std::stoi(b.first);
                              });
                std::string s = "{";
                for (std::size_t i = 0; i < rendered.size(); ++i) {
                    if (i > 0) s += ",";
                    s += "\"" + rendered[i].first + "\":" + rendered[i].second;
                }
                s += "}";
                return s;
            };
            out += "          \"by_state\": " + group_json(true) + ",\n";
            out += "          \"by_week\": " + group_json(false) + ",\n";

            const ConfusionMatrix cm = confusion_matrix(scores.preds, scores.truths);
            out += "          \"confusion\": [";
            for (int i = 0; i < kNumClasses; ++i) {
                if (i > 0) out += ",";
                out += "[";
                for (int j = 0; j < kNumClasses; ++j) {
                    if (j > 0) out += ",";
                    out += std::to_string(
                        cm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                }
                out += "]";
            }
            out += "]";
            if (scores.probabilistic) {
                const auto curve = confidence_curve(scores.dists, scores.dist_truths, thresholds);
                out += ",\n          \"confidence_curve\": [";
                for (std::size_t i = 0; i < curve.size(); ++i) {
                    if (i > 0) out += ",";
                    out += "{\"threshold\":" + num12(curve[i].threshold) + ",\"accuracy\":";
                    out += curve[i].accuracy ? num12(*curve[i].accuracy) : std::string("null");
                    out += ",\"coverage\":" + num12(curve[i].coverage) + "}";
                }
                out += "]\n";
            } else {
                out += "\n";
            }
            out += "        }";
        }
        out += "\n      },\n      \"ranks\": " + ranks_json(rank_models(overall)) + "\n    }";
    }
    out += "\n  }\n}\n";
    return out;
}

inline void cmd_eval(const LoadedConfig& lc) {
    const auto& run = lc.run;
    const Dataset ds = acquire_data(run);
    const SplitPlan plan = resolve_split(run, panel_weeks(ds));

    // truth lookup per horizon from the labels
    std::map<int, std::map<std::pair<std::string, int>, int>> truth;
    for (int h : run.horizons) {
        const LabelSet ls = build_labels(ds, horizon_from_int(h));
        for (const auto& ex : ls.examples)
            if (ex.week >= plan.test_start) truth[h][{ex.state, ex.week}] = ex.target.ordinal;
    }

    const std::string fpath = run.out_dir + "/forecasts.jsonl";
    std::ifstream in(fpath, std::ios::binary);
    if (!in) fail(Errc::MissingBundle, fpath + " (run predict first)");
    std::map<int, std::map<std::string, ModelScores>> by_horizon;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const ForecastRow row = parse_forecast_line(line);
        const auto& tmap = truth[row.horizon];
        const auto it = tmap.find({row.state, row.week});
        if (it == tmap.end()) continue; // forecast beyond the observed panel
        auto& scores = by_horizon[row.horizon][row.model_id];
        scores.probabilistic = row.probabilistic;
        const int t = it->second;
        int pred = row.point_class;
        if (row.probabilistic) {
            scores.dists.push_back(row.probs);
            scores.dist_truths.push_back(t);
            pred = argmax_class(row.probs);
        } else {
            scores.point_preds.push_back(pred);
            scores.point_truths.push_back(t);
        }
        scores.states.push_back(row.state);
        scores.weeks.push_back(row.week);
        scores.preds.push_back(pred);
        scores.truths.push_back(t);
    }
    if (by_horizon.empty()) fail(Errc::EmptyInput, "no scoreable forecasts found");

    write_text_file(run.out_dir + "/metrics.json",
                    metrics_json_text(by_horizon, run.confidence_thresholds));

    // ranks.csv
    {
        CsvWriter w(run.out_dir + "/ranks.csv");
        w.row({"horizon", "model", "accuracy_rank", "mse_rank", "wmse_rank", "brier_rank",
               "rps_rank", "average_rank"});
        for (const auto& [h, models] : by_horizon) {
            std::vector<std::pair<std::string, MetricAggregate>> overall;
            for (const auto& [id, scores] : models)
                overall.emplace_back(id, scores_aggregate(scores));
            const auto ranks = rank_models(overall);
            for (const auto& [id, r] : ranks) {
                std::vector<std::string> cells = {std::to_string(h), id};
                for (const char* metric : metric_names()) {
                    const auto it = r.per_metric.find(metric);
                    cells.push_back(it != r.per_metric.end() ? std::to_string(it->second) : "");
                }
                cells.push_back(num12(r.average_rank));
                w.row(cells);
            }
        }
    }

    // plot assets: per-week and per-state WMSE for probabilistic models
    ensure_dir(run.out_dir + "/plots");
    std::vector<std::pair<std::string, std::string>> artifacts = {{"metrics", "metrics.json"},
                                                                  {"ranks", "ranks.csv"}};
    const std::vector<std::string> palette = {"#1f77b4", "#d62728", "#2ca02c",
                                              "#9467bd", "#ff7f0e", "#8c564b"};
    for (const auto& [h, models] : by_horizon) {
        std::vector<std::string> ids;
        for (const auto& [id, s] : models)
            if (s.probabilistic) ids.push_back(id);
        std::map<std::string, std::map<int, double>> weekly;          // id -> week -> wmse
        std::map<std::string, std::map<std::string, double>> stately; // id -> state -> wmse
        for (const auto& id : ids) {
            const auto& s = models.at(id);
            std::map<int, std::pair<double, long>> wsum;
            std::map<std::string, std::pair<double, long>> ssum;
            for (std::size_t i = 0; i < s.dists.size(); ++i) {
                const double v = example_wmse(s.dists[i], s.dist_truths[i]);
                auto& ws = wsum[s.weeks[i]];
                ws.first += v;
                ws.second += 1;
                auto& ss = ssum[s.states[i]];
                ss.first += v;
                ss.second += 1;
            }
            for (const auto& [w, p] : wsum)
                weekly[id][w] = p.first / static_cast<double>(p.second);
            for (const auto& [st, p] : ssum)
                stately[id][st] = p.first / static_cast<double>(p.second);
        }
        const std::string tag = "h" + std::to_string(h);
        {
            CsvWriter w(run.out_dir + "/plots/weekly_wmse_" + tag + ".csv");
            std::vector<std::string> head = {"week_index"};
            head.insert(head.end(), ids.begin(), ids.end());
            w.row(head);
            std::vector<int> weeks;
            if (!ids.empty())
                for (const auto& [wk, v] : weekly[ids.front()]) weeks.push_back(wk);
            for (int wk : weeks) {
                std::vector<std::string> cells = {std::to_string(wk)};
                for (const auto& id : ids) cells.push_back(num12(weekly[id][wk]));
                w.row(cells);
            }
            std::vector<SvgSeries> series;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                SvgSeries s;
                s.label = ids[i];
                s.color = palette[i % palette.size()];
                for (const auto& [wk, v] : weekly[ids[i]]) {
                    s.x.push_back(wk);
                    s.y.push_back(v);
                }
                series.push_back(std::move(s));
            }
            write_text_file(run.out_dir + "/plots/weekly_wmse_" + tag + ".svg",
                            render_line_chart("Per-week WMSE (" + std::to_string(h) + "-week)",
                                              "week index", "WMSE", series));
            artifacts.emplace_back("weekly_wmse_csv_" + tag, "plots/weekly_wmse_" + tag + ".csv");
            artifacts.emplace_back("weekly_wmse_svg_" + tag, "plots/weekly_wmse_" + tag + ".svg");
        }
        {
            CsvWriter w(run.out_dir + "/plots/state_wmse_" + tag + ".csv");
            std::vector<std::string> head = {"state"};
            head.insert(head.end(), ids.begin(), ids.end());
            w.row(head);
            std::vector<std::string> states;
            if (!ids.empty())
                for (const auto& [st, v] : stately[ids.front()]) states.push_back(st);
            for (const auto& st : states) {
                std::vector<std::string> cells = {st};
                for (const auto& id : ids) cells.push_back(num12(stately[id][st]));
                w.row(cells);
            }
            artifacts.emplace_back("state_wmse_csv_" + tag, "plots/state_wmse_" + tag + ".csv");
        }
    }
    write_manifest(lc, "eval", artifacts);
}

// --- command: ablate --------------------------------------------------------------------

/// Trains one encoder arm and evaluates it on the test examples.
inline MetricAggregate run_arm(const Dataset& ds, const HorizonSplit& split, Horizon h,
                               EncoderKind encoder, const RunConfig& run,
                               const std::string& config_hash, std::uint64_t seed) {
    const Model model = train_main_model(ds, split.train, h, encoder, run.model, run.train, seed,
                                         config_hash);
    const auto [dists, truths] = model_test_forecasts(model, ds, split.test, h);
    return compute_aggregate(dists, truths);
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) fail(Errc::EmptyInput, "median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline void cmd_ablate(const LoadedConfig& lc) {
    const auto& run = lc.run;
    if (std::find(run.ablation_encoders.begin(), run.ablation_encoders.end(), "gru") ==
        run.ablation_encoders.end())
        fail(Errc::InvalidConfig, "ablation requires the gru arm as the delta reference");
    const Dataset ds = acquire_data(run);
    const SplitPlan plan = resolve_split(run, panel_weeks(ds));
    ensure_dir(run.out_dir + "/ablation");
    std::vector<std::pair<std::string, std::string>> artifacts;

    const auto metric_cols = [](const MetricAggregate& a, const MetricAggregate& ref) {
        std::vector<std::string> cells;
        const double vals[] = {a.accuracy, a.mse, a.wmse, a.brier, a.rps};
        const double refs[] = {ref.accuracy, ref.mse, ref.wmse, ref.brier, ref.rps};
        for (double v : vals) cells.push_back(num12(v));
        for (int i = 0; i < 5; ++i) cells.push_back(num12(vals[i] - refs[i]));
        return cells;
    };

    for (int h : run.horizons) {
        const Horizon hz = horizon_from_int(h);
        const LabelSet labels = build_labels(ds, hz);
        const HorizonSplit split = split_examples(labels, plan, run.split, hz);
        const std::string tag = "h" + std::to_string(h);

        // per-seed tables
        std::map<std::string, std::map<std::string, std::vector<double>>> arm_metric_values;
        for (std::uint64_t seed : run.seeds) {
            std::map<std::string, MetricAggregate> per_arm;
            for (const auto& name : run.ablation_encoders)
                per_arm[name] =
                    run_arm(ds, split, hz, encoder_kind_from_name(name), run, lc.hash, seed);
            const std::string path =
                "ablation/seed_" + std::to_string(seed) + "_" + tag + ".csv";
            CsvWriter w(run.out_dir + "/" + path);
            w.row({"encoder", "accuracy", "mse", "wmse", "brier", "rps", "delta_accuracy",
                   "delta_mse", "delta_wmse", "delta_brier", "delta_rps"});
            const MetricAggregate& ref = per_arm.at("gru");
            for (const auto& name : run.ablation_encoders) {
                std::vector<std::string> cells = {name};
                const auto vals = metric_cols(per_arm.at(name), ref);
                cells.insert(cells.end(), vals.begin(), vals.end());
                w.row(cells);
                const MetricAggregate& a = per_arm.at(name);
                arm_metric_values[name]["accuracy"].push_back(a.accuracy);
                arm_metric_values[name]["mse"].push_back(a.mse);
                arm_metric_values[name]["wmse"].push_back(a.wmse);
                arm_metric_values[name]["brier"].push_back(a.brier);
                arm_metric_values[name]["rps"].push_back(a.rps);
            }
            artifacts.emplace_back("seed_" + std::to_string(seed) + "_" + tag, path);
        }

        // median table with deltas vs the GRU medians
        const std::string mpath = "ablation/median_" + tag + ".csv";
        CsvWriter w(run.out_dir + "/" + mpath);
        w.row({"encoder", "accuracy", "mse", "wmse", "brier", "rps", "delta_accuracy",
               "delta_mse", "delta_wmse", "delta_brier", "delta_rps"});
        std::map<std::string, double> gru_median;
        for (const char* metric : metric_names())
            gru_median[metric] = median_of(arm_metric_values.at("gru").at(metric));
        for (const auto& name : run.ablation_encoders) {
            std::vector<std::string> cells = {name};
            std::vector<double> med;
            for (const char* metric : metric_names())
                med.push_back(median_of(arm_metric_values.at(name).at(metric)));
            for (double v : med) cells.push_back(num12(v));
            for (std::size_t i = 0; i < med.size(); ++i)
                cells.push_back(num12(med[i] - gru_median[metric_names()[i]]));
            w.row(cells);
        }
        artifacts.emplace_back("median_" + tag, mpath);
    }
    write_manifest(lc, "ablate", artifacts);
}

// --- command: gsi -----------------------------------------------------------------------

inline void cmd_gsi(const LoadedConfig& lc) {
    const auto& run = lc.run;
    Dataset ds = acquire_data(run);
    const int n_weeks = panel_weeks(ds);
    const SplitPlan plan = resolve_split(run, n_weeks);
    ensure_dir(run.out_dir + "/gsi");
    std::vector<std::pair<std::string, std::string>> artifacts;

    for (int h : run.horizons) {
        const Horizon hz = horizon_from_int(h);
        const LabelSet labels = build_labels(ds, hz);
        HorizonSplit split = split_examples(labels, plan, run.split, hz);
        // only examples with a full feature window can be predicted
        std::erase_if(split.test, [](const LabeledExample& ex) { return ex.record_index < 0; });
        const std::string tag = "h" + std::to_string(h);

        struct Condition {
            bool include;
            std::map<int, double> wmse;
            std::map<int, double> confidence;
        };
        std::vector<Condition> conditions = {{true, {}, {}}, {false, {}, {}}};
        for (auto& cond : conditions) {
            for (auto& rec : ds.records) rec.include_genomic = cond.include;
            const Model model = train_main_model(ds, split.train, hz, run.model.encoder,
                                                 run.model, run.train, run.seed, lc.hash);
            std::map<int, std::vector<std::size_t>> test_by_week;
            for (std::size_t i = 0; i < split.test.size(); ++i)
                test_by_week[split.test[i].week].push_back(i);
            std::vector<Probs> dists(split.test.size());
            parallel_for(static_cast<long>(split.test.size()), [&](long i) {
                const auto& ex = split.test[static_cast<std::size_t>(i)];
                dists[static_cast<std::size_t>(i)] = model.predict_example(model.prepare_example(
                    ds.records[static_cast<std::size_t>(ex.record_index)], hz, nullptr));
            });
            for (const auto& [w, idxs] : test_by_week) {
                double wm = 0.0, conf = 0.0;
                for (std::size_t i : idxs) {
                    wm += example_wmse(dists[i], split.test[i].target.ordinal);
                    conf += *std::max_element(dists[i].begin(), dists[i].end());
                }
                cond.wmse[w] = wm / static_cast<double>(idxs.size());
                cond.confidence[w] = conf / static_cast<double>(idxs.size());
            }
        }
        // restore the configured toggle
        for (auto& rec : ds.records) rec.include_genomic = run.include_genomic;

        const std::string cpath = "gsi/gsi_" + tag + ".csv";
        CsvWriter w(run.out_dir + "/" + cpath);
        w.row({"week_index", "wmse_with_genomic", "wmse_without_genomic",
               "confidence_with_genomic", "confidence_without_genomic"});
        for (const auto& [wk, v] : conditions[0].wmse)
            w.row({std::to_string(wk), num12(v), num12(conditions[1].wmse.at(wk)),
                   num12(conditions[0].confidence.at(wk)),
                   num12(conditions[1].confidence.at(wk))});
        artifacts.emplace_back("gsi_csv_" + tag, cpath);

        const auto to_series = [&](const std::map<int, double>& m, const std::string& label,
                                   const std::string& color) {
            SvgSeries s;
            s.label = label;
            s.color = color;
            for (const auto& [wk, v] : m) {
                s.x.push_back(wk);
                s.y.push_back(v);
            }
            return s;
        };
        write_text_file(
            run.out_dir + "/gsi/gsi_wmse_" + tag + ".svg",
            render_line_chart("Per-week WMSE with/without genomic signal (" + std::to_string(h) +
                                  "-week)",
                              "week index", "WMSE",
                              {to_series(conditions[0].wmse, "with genomic", "#1f77b4"),
                               to_series(conditions[1].wmse, "without genomic", "#d62728")}));
        write_text_file(
            run.out_dir + "/gsi/gsi_confidence_" + tag + ".svg",
            render_line_chart("Per-week mean confidence (" + std::to_string(h) + "-week)",
                              "week index", "mean max probability",
                              {to_series(conditions[0].confidence, "with genomic", "#1f77b4"),
                               to_series(conditions[1].confidence, "without genomic", "#d62728")}));
        artifacts.emplace_back("gsi_wmse_svg_" + tag, "gsi/gsi_wmse_" + tag + ".svg");
        artifacts.emplace_back("gsi_confidence_svg_" + tag, "gsi/gsi_confidence_" + tag + ".svg");
    }
    write_manifest(lc, "gsi", artifacts);
}

// --- dispatcher -------------------------------------------------------------------------

inline void run_command(const std::string& name, const LoadedConfig& lc) {
    if (name == "synth") cmd_synth(lc);
    else if (name == "ingest") cmd_ingest(lc);
    else if (name == "labels") cmd_labels(lc);
    else if (name == "prompts") cmd_prompts(lc);
    else if (name == "train") cmd_train(lc);
    else if (name == "predict") cmd_predict(lc);
    else if (name == "eval") cmd_eval(lc);
    else if (name == "ablate") cmd_ablate(lc);
    else if (name == "gsi") cmd_gsi(lc);
    else fail(Errc::InvalidConfig, "unknown command " + name);
}

} // namespace epicast
