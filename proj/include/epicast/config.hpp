#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "epicast/baselines.hpp"
#include "epicast/common.hpp"
#include "epicast/dataset.hpp"
#include "epicast/encoders.hpp"
#include "epicast/model.hpp"
#include "epicast/synthetic.hpp"
#include "epicast/train.hpp"

namespace epicast {

inline constexpr int kConfigSchemaVersion = 1;

struct SplitSpec {
    int test_start_week = -1;  ///< default: final 16 weeks of the panel
    int train_end_week = -1;   ///< default: test_start_week - 3 (safe for both horizons)
    double train_ratio = 0.8;
    std::uint64_t split_seed = 17;
};

struct RunConfig {
    int schema_version = kConfigSchemaVersion;
    std::string data_dir;            ///< empty: use the synthetic scenario
    SyntheticConfig synth;
    std::vector<int> horizons = {1, 3};
    SplitSpec split;
    ModelConfig model;
    TrainConfig train;
    SeqClassifierConfig classifier;
    bool include_genomic = true;
    std::vector<std::string> ablation_encoders = {"gru", "vanilla-rnn", "lstm", "none"};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::uint64_t seed = 1;
    std::string out_dir = "runs/default";
    std::vector<double> confidence_thresholds;  ///< default grid 0.00..0.95 step 0.05
};

/// FNV-1a 64-bit over the canonical config text; stable across platforms.
inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::InvalidConfig, std::string("config field '") + key + "': " + e.what());
    }
}

} // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    if (!j.is_object()) fail(Errc::InvalidConfig, "config root must be a JSON object");
    RunConfig cfg;
    detail::read_field(j, "schema_version", cfg.schema_version);
    if (cfg.schema_version != kConfigSchemaVersion)
        fail(Errc::InvalidConfig,
             "unsupported schema_version " + std::to_string(cfg.schema_version));
    detail::read_field(j, "data_dir", cfg.data_dir);
    if (j.contains("synthetic")) {
        const auto& s = j.at("synthetic");
        if (!s.is_object()) fail(Errc::InvalidConfig, "'synthetic' must be an object");
        detail::read_field(s, "n_states", cfg.synth.n_states);
        detail::read_field(s, "n_weeks", cfg.synth.n_weeks);
        detail::read_field(s, "start_date", cfg.synth.start_date);
        detail::read_field(s, "base_rate", cfg.synth.base_rate);
        detail::read_field(s, "wave_amplitude", cfg.synth.wave_amplitude);
        detail::read_field(s, "wave_period", cfg.synth.wave_period);
        detail::read_field(s, "wave_damping", cfg.synth.wave_damping);
        detail::read_field(s, "noise_sd", cfg.synth.noise_sd);
        detail::read_field(s, "case_multiplier", cfg.synth.case_multiplier);
        detail::read_field(s, "case_noise", cfg.synth.case_noise);
        if (s.contains("variants")) {
            cfg.synth.variants.clear();
            for (const auto& v : s.at("variants")) {
                VariantSchedule vs;
                detail::read_field(v, "name", vs.name);
                detail::read_field(v, "emergence_week", vs.emergence_week);
                detail::read_field(v, "growth", vs.growth);
                detail::read_field(v, "severity_boost", vs.severity_boost);
                std::string inf = variant_attr_name(vs.infectiousness);
                std::string sev = variant_attr_name(vs.severity);
                std::string imm = variant_attr_name(vs.immune_resistance);
                detail::read_field(v, "infectiousness", inf);
                detail::read_field(v, "severity", sev);
                detail::read_field(v, "immune_resistance", imm);
                vs.infectiousness = parse_variant_attr(inf);
                vs.severity = parse_variant_attr(sev);
                vs.immune_resistance = parse_variant_attr(imm);
                cfg.synth.variants.push_back(std::move(vs));
            }
        }
    }
    detail::read_field(j, "horizons", cfg.horizons);
    if (cfg.horizons.empty()) fail(Errc::InvalidConfig, "'horizons' must be nonempty");
    for (int h : cfg.horizons) horizon_from_int(h); // validates membership in {1, 3}
    if (j.contains("split")) {
        const auto& s = j.at("split");
        detail::read_field(s, "test_start_week", cfg.split.test_start_week);
        detail::read_field(s, "train_end_week", cfg.split.train_end_week);
        detail::read_field(s, "train_ratio", cfg.split.train_ratio);
        detail::read_field(s, "split_seed", cfg.split.split_seed);
    }
    if (!(cfg.split.train_ratio > 0.0 && cfg.split.train_ratio < 1.0))
        fail(Errc::InvalidConfig, "train_ratio must lie in (0, 1)");
    if (j.contains("model")) {
        const auto& m = j.at("model");
        detail::read_field(m, "d_model", cfg.model.d_model);
        detail::read_field(m, "n_blocks", cfg.model.n_blocks);
        detail::read_field(m, "n_heads", cfg.model.n_heads);
        detail::read_field(m, "d_ff", cfg.model.d_ff);
        detail::read_field(m, "max_len", cfg.model.max_len);
        std::string enc = encoder_kind_name(cfg.model.encoder);
        detail::read_field(m, "encoder", enc);
        cfg.model.encoder = encoder_kind_from_name(enc);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        detail::read_field(t, "steps", cfg.train.steps);
        detail::read_field(t, "batch_size", cfg.train.batch_size);
        detail::read_field(t, "lr", cfg.train.lr);
        detail::read_field(t, "clip_norm", cfg.train.clip_norm);
        if (cfg.train.steps < 1 || cfg.train.batch_size < 1 || cfg.train.lr <= 0.0)
            fail(Errc::InvalidConfig, "train settings must be positive");
    }
    if (j.contains("classifier")) {
        const auto& c = j.at("classifier");
        detail::read_field(c, "hidden", cfg.classifier.hidden);
        detail::read_field(c, "steps", cfg.classifier.steps);
        detail::read_field(c, "batch_size", cfg.classifier.batch_size);
        detail::read_field(c, "lr", cfg.classifier.lr);
        if (cfg.classifier.hidden < 1 || cfg.classifier.steps < 1 || cfg.classifier.batch_size < 1)
            fail(Errc::InvalidConfig, "classifier settings must be positive");
    }
    detail::read_field(j, "include_genomic", cfg.include_genomic);
    detail::read_field(j, "ablation_encoders", cfg.ablation_encoders);
    for (const auto& name : cfg.ablation_encoders) encoder_kind_from_name(name);
    detail::read_field(j, "seeds", cfg.seeds);
    if (cfg.seeds.empty()) fail(Errc::InvalidConfig, "'seeds' must be nonempty");
    detail::read_field(j, "seed", cfg.seed);
    detail::read_field(j, "out_dir", cfg.out_dir);
    if (cfg.out_dir.empty()) fail(Errc::InvalidConfig, "'out_dir' must be nonempty");
    detail::read_field(j, "confidence_thresholds", cfg.confidence_thresholds);
    if (cfg.confidence_thresholds.empty())
        for (int i = 0; i < 20; ++i) cfg.confidence_thresholds.push_back(0.05 * i);
    for (std::size_t i = 1; i < cfg.confidence_thresholds.size(); ++i)
        if (cfg.confidence_thresholds[i] < cfg.confidence_thresholds[i - 1])
            fail(Errc::InvalidConfig, "confidence_thresholds must be ascending");
    if (cfg.data_dir.empty()) validate_synthetic_config(cfg.synth);
    return cfg;
}

struct LoadedConfig {
    RunConfig run;
    std::string canonical_text; ///< sorted-key dump used for the config hash
    std::string hash;
};

inline LoadedConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoError, "cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, std::string("config JSON: ") + e.what());
    }
    LoadedConfig out;
    out.run = parse_run_config(j);
    out.canonical_text = j.dump(); // nlohmann objects iterate in sorted key order
    out.hash = fnv1a_hex(out.canonical_text);
    return out;
}

} // namespace epicast
