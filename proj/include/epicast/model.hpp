#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "epicast/encoders.hpp"
#include "epicast/metrics.hpp"
#include "epicast/rng.hpp"
#include "epicast/textualizer.hpp"
#include "epicast/vocab.hpp"

namespace epicast {

struct Param {
    std::string name;
    Mat value;
    bool trainable = false;
    Mat m, v; ///< optimizer moments, sized lazily by the trainer
};

struct ModelConfig {
    int d_model = 64;
    int n_blocks = 2;
    int n_heads = 4;
    int d_ff = 256;
    int max_len = 512;
    int window_len = 12; ///< encoder steps (the record's epi window length)
    int input_size = 2;  ///< HR + HT per step
    int horizon = 1;     ///< forecast horizon the bundle is fine-tuned for
    EncoderKind encoder = EncoderKind::GRU;
};

inline void validate_model_config(const ModelConfig& c) {
    if (c.d_model <= 0 || c.n_blocks <= 0 || c.n_heads <= 0 || c.d_ff <= 0 || c.max_len <= 0 ||
        c.window_len < 4 || c.input_size <= 0)
        fail(Errc::InvalidConfig, "model dimensions must be positive (window_len >= 4)");
    if (c.d_model % c.n_heads != 0)
        fail(Errc::InvalidConfig, "d_model must be divisible by n_heads");
    horizon_from_int(c.horizon);
}

/// Per-example tokenized training/inference input.
struct TokenizedExample {
    std::vector<int> ids;       ///< <bos>-prefixed token ids (no target token)
    int special_index = -1;     ///< position of the series token in `ids`, or -1
    Mat features;               ///< window_len x input_size raw encoder features
    int target_ordinal = 0;     ///< 1..5; 0 in inference mode
};

/// The trainable/frozen split: token embeddings, output projection, and
/// encoder parameters train; transformer blocks, positional embeddings, and
/// the final layer norm stay frozen.
class Model {
  public:
    ModelConfig cfg;
    Vocab vocab;
    std::vector<Param> params;
    std::array<double, 2> feat_mean{0.0, 0.0};
    std::array<double, 2> feat_std{1.0, 1.0};
    std::uint64_t seed = 0;
    std::string config_hash;

    struct BlockIdx {
        int ln1_g, ln1_b, wq, wk, wv, wo, ln2_g, ln2_b, w1, b1, w2, b2;
    };

    int tok_emb = -1, pos_emb = -1, w_out = -1, lnf_g = -1, lnf_b = -1;
    std::vector<BlockIdx> blocks;
    std::vector<int> encoder_params;

    Model() = default;

    Model(Vocab v, ModelConfig config, std::uint64_t init_seed) {
        validate_model_config(config);
        cfg = config;
        vocab = std::move(v);
        seed = init_seed;
        Rng rng(init_seed);
        const int V = vocab.size();
        const int d = cfg.d_model;

        tok_emb = add_param("tok_emb", V, d, true, rng, 0.02);
        pos_emb = add_param("pos_emb", cfg.max_len, d, false, rng, 0.02);
        for (int b = 0; b < cfg.n_blocks; ++b) {
            const std::string p = "block" + std::to_string(b) + ".";
            BlockIdx bi{};
            bi.ln1_g = add_const_param(p + "ln1_g", 1, d, 1.0);
            bi.ln1_b = add_const_param(p + "ln1_b", 1, d, 0.0);
            bi.wq = add_param(p + "wq", d, d, false, rng, 0.08);
            bi.wk = add_param(p + "wk", d, d, false, rng, 0.08);
            bi.wv = add_param(p + "wv", d, d, false, rng, 0.08);
            bi.wo = add_param(p + "wo", d, d, false, rng, 0.08);
            bi.ln2_g = add_const_param(p + "ln2_g", 1, d, 1.0);
            bi.ln2_b = add_const_param(p + "ln2_b", 1, d, 0.0);
            bi.w1 = add_param(p + "w1", d, cfg.d_ff, false, rng, 0.08);
            bi.b1 = add_const_param(p + "b1", 1, cfg.d_ff, 0.0);
            bi.w2 = add_param(p + "w2", cfg.d_ff, d, false, rng, 0.08);
            bi.b2 = add_const_param(p + "b2", 1, d, 0.0);
            blocks.push_back(bi);
        }
        lnf_g = add_const_param("lnf_g", 1, d, 1.0);
        lnf_b = add_const_param("lnf_b", 1, d, 0.0);
        // near-zero output projection: class distribution starts ~uniform
        w_out = add_param("w_out", d, V, true, rng, 1e-3);

        if (cfg.encoder != EncoderKind::None) {
            for (const auto& shape : encoder_param_shapes(encoder_spec())) {
                encoder_params.push_back(add_param(shape.name, static_cast<int>(shape.rows),
                                                   static_cast<int>(shape.cols), true, rng, 0.1));
                // biases start at zero
                Param& last = params.back();
                if (last.value.rows() == 1 && shape.name.find(".b") != std::string::npos)
                    last.value.setZero();
            }
        }
    }

    EncoderSpec encoder_spec() const { return {cfg.encoder, cfg.input_size, cfg.d_model}; }

    // --- forward pieces ------------------------------------------------------

    /// Lazily-created leaf per parameter on this tape.
    struct TapeCtx {
        Tape tape;
        std::vector<Var> leaves; ///< aligned with params; idx -1 = not created
    };

    Var pvar(TapeCtx& ctx, int param_idx) const {
        if (ctx.leaves.empty()) ctx.leaves.assign(params.size(), Var{-1});
        Var& slot = ctx.leaves[static_cast<std::size_t>(param_idx)];
        if (slot.idx < 0)
            slot = ctx.tape.leaf(params[static_cast<std::size_t>(param_idx)].value, true);
        return slot;
    }

    /// Token + positional embeddings for an id sequence: |ids| x d.
    Var embed(TapeCtx& ctx, const std::vector<int>& ids) const {
        if (ids.empty()) fail(Errc::ShapeMismatch, "empty id sequence");
        if (static_cast<int>(ids.size()) > cfg.max_len)
            fail(Errc::ShapeMismatch, "sequence length " + std::to_string(ids.size()) +
                                          " exceeds max_len " + std::to_string(cfg.max_len));
        for (int id : ids)
            if (id < 0 || id >= vocab.size()) fail(Errc::IdOutOfRange, std::to_string(id));
        std::vector<int> positions(ids.size());
        std::iota(positions.begin(), positions.end(), 0);
        Var tok = ctx.tape.gather_rows(pvar(ctx, tok_emb), ids);
        Var pos = ctx.tape.gather_rows(pvar(ctx, pos_emb), positions);
        return ctx.tape.add(tok, pos);
    }

    /// Standardized encoder features (does not touch the tape).
    Mat standardize(const Mat& features) const {
        Mat out = features;
        for (long c = 0; c < out.cols(); ++c) {
            const auto ci = static_cast<std::size_t>(std::min<long>(c, 1));
            out.col(c) = (out.col(c).array() - feat_mean[ci]) / feat_std[ci];
        }
        return out;
    }

    /// z = g_phi(X): final hidden state of the sequence encoder, 1 x d.
    Var encode(TapeCtx& ctx, const Mat& features) const {
        std::vector<Var> pv;
        for (int idx : encoder_params) pv.push_back(pvar(ctx, idx));
        Var X = ctx.tape.leaf(standardize(features), false);
        return encode_on_tape(ctx.tape, encoder_spec(), pv, X);
    }

    Var transformer_block(TapeCtx& ctx, const BlockIdx& bi, Var x) const {
        Tape& t = ctx.tape;
        const int dh = cfg.d_model / cfg.n_heads;
        Var n1 = t.layer_norm(x, pvar(ctx, bi.ln1_g), pvar(ctx, bi.ln1_b));
        Var q = t.matmul(n1, pvar(ctx, bi.wq));
        Var k = t.matmul(n1, pvar(ctx, bi.wk));
        Var v = t.matmul(n1, pvar(ctx, bi.wv));
        std::vector<Var> heads;
        for (int h = 0; h < cfg.n_heads; ++h) {
            Var qh = t.slice_cols(q, h * dh, dh);
            Var kh = t.slice_cols(k, h * dh, dh);
            Var vh = t.slice_cols(v, h * dh, dh);
            Var scores = t.affine(t.matmul_nt(qh, kh), 1.0 / std::sqrt(static_cast<double>(dh)), 0.0);
            heads.push_back(t.matmul(t.causal_softmax(scores), vh));
        }
        Var attn = t.matmul(t.concat_cols(heads), pvar(ctx, bi.wo));
        x = t.add(x, attn);
        Var n2 = t.layer_norm(x, pvar(ctx, bi.ln2_g), pvar(ctx, bi.ln2_b));
        Var ff1 = t.gelu(t.add_rowvec(t.matmul(n2, pvar(ctx, bi.w1)), pvar(ctx, bi.b1)));
        Var ff2 = t.add_rowvec(t.matmul(ff1, pvar(ctx, bi.w2)), pvar(ctx, bi.b2));
        return t.add(x, ff2);
    }

    /// Embeds, optionally injects the encoded series at the special-token row,
    /// runs the blocks, applies the final layer norm. Returns |ids| x d states.
    Var decode_states(TapeCtx& ctx, const TokenizedExample& ex) const {
        Var h = embed(ctx, ex.ids);
        if (cfg.encoder != EncoderKind::None && ex.special_index >= 0) {
            Var z = encode(ctx, ex.features);
            h = ctx.tape.set_row(h, z, ex.special_index);
        }
        for (const auto& bi : blocks) h = transformer_block(ctx, bi, h);
        return ctx.tape.layer_norm(h, pvar(ctx, lnf_g), pvar(ctx, lnf_b));
    }

    /// Per-position logits over the whole vocabulary: |ids| x V.
    Var forward_logits(TapeCtx& ctx, const TokenizedExample& ex) const {
        return ctx.tape.matmul(decode_states(ctx, ex), pvar(ctx, w_out));
    }

    /// Logits at the answer position only (the final input position): 1 x V.
    Var answer_logits(TapeCtx& ctx, const TokenizedExample& ex) const {
        Var states = decode_states(ctx, ex);
        Var last = ctx.tape.row(states, static_cast<int>(ex.ids.size()) - 1);
        return ctx.tape.matmul(last, pvar(ctx, w_out));
    }

    /// Cross-entropy of the target class token under the restricted softmax.
    Var example_loss(TapeCtx& ctx, const TokenizedExample& ex) const {
        if (ex.target_ordinal < 1 || ex.target_ordinal > kNumClasses)
            fail(Errc::InvalidValue, "target ordinal out of 1..5");
        const auto cls = vocab.class_ids();
        std::vector<int> ids(cls.begin(), cls.end());
        return ctx.tape.restricted_ce(answer_logits(ctx, ex), ids, ex.target_ordinal - 1);
    }

    /// Restricted softmax over the five class-token logits.
    Probs class_distribution(const Mat& logits_row) const {
        if (logits_row.rows() != 1 || logits_row.cols() != vocab.size())
            fail(Errc::ShapeMismatch, "logits row shape");
        const auto cls = vocab.class_ids();
        Probs p{};
        double m = -1e300;
        for (int id : cls) m = std::max(m, logits_row(0, id));
        double sum = 0.0;
        for (int k = 0; k < kNumClasses; ++k) {
            p[static_cast<std::size_t>(k)] =
                std::exp(logits_row(0, cls[static_cast<std::size_t>(k)]) - m);
            sum += p[static_cast<std::size_t>(k)];
        }
        for (auto& v : p) v /= sum;
        return p;
    }

    /// Inference on a prepared example (no target needed).
    Probs predict_example(const TokenizedExample& ex) const {
        TapeCtx ctx;
        Var logits = answer_logits(ctx, ex);
        return class_distribution(ctx.tape.value(logits));
    }

    /// Renders the record's inference prompt, tokenizes, encodes, predicts.
    Probs predict(const DataRecord& rec) const {
        return predict_example(prepare_example(rec, horizon_from_int(cfg.horizon), nullptr));
    }

    /// Builds the tokenized example (prompt text + encoder features) for a
    /// record; target may be null for inference mode.
    TokenizedExample prepare_example(const DataRecord& rec, Horizon horizon,
                                     const HtcClass* target) const {
        const PromptDocument doc = assemble_prompt(rec, horizon, nullptr);
        TokenizedExample ex;
        ex.ids = tokenize(doc.text, vocab);
        for (std::size_t j = 0; j < ex.ids.size(); ++j)
            if (ex.ids[j] == Vocab::kSeries) {
                ex.special_index = static_cast<int>(j);
                break;
            }
        ex.features = record_features(rec);
        ex.target_ordinal = target ? target->ordinal : 0;
        return ex;
    }

    /// window_len x 2 raw feature matrix (HR, backward HT) from the record.
    Mat record_features(const DataRecord& rec) const {
        const auto n = static_cast<long>(rec.epi_window.size());
        if (n != cfg.window_len)
            fail(Errc::ShapeMismatch, "record window " + std::to_string(n) + " != model window " +
                                          std::to_string(cfg.window_len));
        std::vector<double> hr(rec.epi_window.size());
        for (std::size_t i = 0; i < hr.size(); ++i) hr[i] = rec.epi_window[i].hosp_rate;
        Mat X(n, 2);
        for (long i = 0; i < n; ++i) {
            X(i, 0) = hr[static_cast<std::size_t>(i)];
            X(i, 1) = backward_trend(hr, static_cast<int>(i));
        }
        return X;
    }

    // --- bundle serialization -------------------------------------------------

    void save(const std::string& path) const;
    static Model load(const std::string& path);

  private:
    int add_param(const std::string& name, int rows, int cols, bool trainable, Rng& rng,
                  double stddev) {
        Param p;
        p.name = name;
        p.trainable = trainable;
        p.value = Mat(rows, cols);
        for (long i = 0; i < p.value.rows(); ++i)
            for (long j = 0; j < p.value.cols(); ++j) p.value(i, j) = rng.normal(0.0, stddev);
        params.push_back(std::move(p));
        return static_cast<int>(params.size()) - 1;
    }

    int add_const_param(const std::string& name, int rows, int cols, double fill) {
        Param p;
        p.name = name;
        p.trainable = false;
        p.value = Mat::Constant(rows, cols, fill);
        params.push_back(std::move(p));
        return static_cast<int>(params.size()) - 1;
    }
};

// --- binary bundle IO ---------------------------------------------------------
// Layout (little-endian throughout; see docs/formats.md):
//   magic "EPCB", u32 version, u64 seed,
//   8 x i32 config ints, u8 encoder kind,
//   string config_hash, 4 x f64 standardization constants,
//   u32 vocab size, strings,
//   u32 param count, then per param: string name, u8 trainable, i64 rows,
//   i64 cols, rows*cols f64 (row-major).

namespace bundle_io {

inline void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T> void put(std::ostream& out, T v) { put_bytes(out, &v, sizeof(T)); }

inline void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    put_bytes(out, s.data(), s.size());
}

inline void get_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) fail(Errc::ParseError, "truncated model bundle");
}

template <typename T> T get(std::istream& in) {
    T v;
    get_bytes(in, &v, sizeof(T));
    return v;
}

inline std::string get_string(std::istream& in) {
    const auto n = get<std::uint32_t>(in);
    if (n > (1u << 26)) fail(Errc::ParseError, "bundle string too long");
    std::string s(n, '\0');
    if (n > 0) get_bytes(in, s.data(), n);
    return s;
}

} // namespace bundle_io

inline void Model::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    using namespace bundle_io;
    put_bytes(out, "EPCB", 4);
    put<std::uint32_t>(out, 1);
    put<std::uint64_t>(out, seed);
    for (int v : {cfg.d_model, cfg.n_blocks, cfg.n_heads, cfg.d_ff, cfg.max_len, cfg.window_len,
                  cfg.input_size, cfg.horizon})
        put<std::int32_t>(out, v);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(cfg.encoder));
    put_string(out, config_hash);
    for (double v : {feat_mean[0], feat_mean[1], feat_std[0], feat_std[1]}) put<double>(out, v);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(vocab.size()));
    for (const auto& tok : vocab.tokens()) put_string(out, tok);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        put_string(out, p.name);
        put<std::uint8_t>(out, p.trainable ? 1 : 0);
        put<std::int64_t>(out, p.value.rows());
        put<std::int64_t>(out, p.value.cols());
        for (long i = 0; i < p.value.rows(); ++i)
            for (long j = 0; j < p.value.cols(); ++j) put<double>(out, p.value(i, j));
    }
    if (!out) fail(Errc::IoError, "failed writing " + path);
}

inline Model Model::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::MissingBundle, path);
    using namespace bundle_io;
    char magic[4];
    get_bytes(in, magic, 4);
    if (std::memcmp(magic, "EPCB", 4) != 0) fail(Errc::ParseError, "not a model bundle: " + path);
    if (get<std::uint32_t>(in) != 1) fail(Errc::ParseError, "unsupported bundle version");
    const auto seed = get<std::uint64_t>(in);
    ModelConfig cfg;
    cfg.d_model = get<std::int32_t>(in);
    cfg.n_blocks = get<std::int32_t>(in);
    cfg.n_heads = get<std::int32_t>(in);
    cfg.d_ff = get<std::int32_t>(in);
    cfg.max_len = get<std::int32_t>(in);
    cfg.window_len = get<std::int32_t>(in);
    cfg.input_size = get<std::int32_t>(in);
    cfg.horizon = get<std::int32_t>(in);
    cfg.encoder = static_cast<EncoderKind>(get<std::uint8_t>(in));
    const std::string config_hash = get_string(in);
    std::array<double, 2> mean{}, std{};
    mean[0] = get<double>(in);
    mean[1] = get<double>(in);
    std[0] = get<double>(in);
    std[1] = get<double>(in);
    const auto vocab_size = get<std::uint32_t>(in);
    std::vector<std::string> tokens;
    tokens.reserve(vocab_size);
    for (std::uint32_t i = 0; i < vocab_size; ++i) tokens.push_back(get_string(in));

    // Rebuild with the recorded structure, then overwrite parameter values.
    Model model(Vocab(std::move(tokens)), cfg, seed);
    model.config_hash = config_hash;
    model.feat_mean = mean;
    model.feat_std = std;
    const auto n_params = get<std::uint32_t>(in);
    if (n_params != model.params.size()) fail(Errc::ParseError, "bundle param count mismatch");
    for (auto& p : model.params) {
        const std::string name = get_string(in);
        if (name != p.name) fail(Errc::ParseError, "bundle param order mismatch at " + name);
        const bool trainable = get<std::uint8_t>(in) != 0;
        const auto rows = get<std::int64_t>(in);
        const auto cols = get<std::int64_t>(in);
        if (trainable != p.trainable || rows != p.value.rows() || cols != p.value.cols())
            fail(Errc::ParseError, "bundle param shape mismatch at " + name);
        for (long i = 0; i < rows; ++i)
            for (long j = 0; j < cols; ++j) p.value(i, j) = get<double>(in);
    }
    return model;
}

} // namespace epicast
