#pragma once

#include <array>
#include <string>
#include <vector>

#include "epicast/autodiff.hpp"

namespace epicast {

enum class EncoderKind { GRU, VanillaRNN, LSTM, None };

inline const char* encoder_kind_name(EncoderKind k) {
    switch (k) {
        case EncoderKind::GRU: return "gru";
        case EncoderKind::VanillaRNN: return "vanilla-rnn";
        case EncoderKind::LSTM: return "lstm";
        case EncoderKind::None: return "none";
    }
    fail(Errc::InvalidValue, "bad encoder kind");
}

inline EncoderKind encoder_kind_from_name(const std::string& name) {
    for (EncoderKind k :
         {EncoderKind::GRU, EncoderKind::VanillaRNN, EncoderKind::LSTM, EncoderKind::None})
        if (name == encoder_kind_name(k)) return k;
    fail(Errc::InvalidConfig, "unknown encoder kind '" + name + "'");
}

struct EncoderSpec {
    EncoderKind kind = EncoderKind::GRU;
    int input_size = 2;
    int hidden = 64;
};

struct ParamShape {
    std::string name;
    long rows = 0;
    long cols = 0;
};

/// Parameter layout per kind, in the order encode_on_tape consumes them.
/// Gate weight triples are (input weight W, recurrent weight U, bias b).
inline std::vector<ParamShape> encoder_param_shapes(const EncoderSpec& spec) {
    const long in = spec.input_size, d = spec.hidden;
    const auto gate = [&](const std::string& g) {
        return std::vector<ParamShape>{{"enc.W" + g, in, d}, {"enc.U" + g, d, d}, {"enc.b" + g, 1, d}};
    };
    std::vector<ParamShape> shapes;
    std::vector<std::string> gates;
    switch (spec.kind) {
        case EncoderKind::VanillaRNN: gates = {"h"}; break;
        case EncoderKind::GRU: gates = {"z", "r", "h"}; break;
        case EncoderKind::LSTM: gates = {"i", "f", "o", "g"}; break;
        case EncoderKind::None: return {};
    }
    for (const auto& g : gates)
        for (auto& s : gate(g)) shapes.push_back(std::move(s));
    return shapes;
}

namespace detail {

/// x W + h U + b for one step (all row vectors).
inline Var gate_preact(Tape& t, Var x, Var h, Var W, Var U, Var b) {
    return t.add_rowvec(t.add(t.matmul(x, W), t.matmul(h, U)), b);
}

} // namespace detail

/// Runs the recurrence over the rows of X (chronological order) and returns
/// the final hidden state as a 1 x hidden row. `params` follows
/// encoder_param_shapes order.
inline Var encode_on_tape(Tape& t, const EncoderSpec& spec, const std::vector<Var>& params, Var X) {
    if (spec.kind == EncoderKind::None)
        fail(Errc::InvalidConfig, "encoder kind 'none' has no sequence output");
    const Mat& x_val = t.value(X);
    if (x_val.cols() != spec.input_size)
        fail(Errc::ShapeMismatch, "encoder input width " + std::to_string(x_val.cols()) +
                                      " != " + std::to_string(spec.input_size));
    if (x_val.rows() < 1) fail(Errc::ShapeMismatch, "encoder needs >= 1 step");
    if (params.size() != encoder_param_shapes(spec).size())
        fail(Errc::ShapeMismatch, "encoder param count");

    Var h = t.leaf(Mat::Zero(1, spec.hidden), false);
    Var c = h; // LSTM cell state
    const long steps = x_val.rows();
    for (long step = 0; step < steps; ++step) {
        Var x = t.row(X, static_cast<int>(step));
        switch (spec.kind) {
            case EncoderKind::VanillaRNN: {
                h = t.tanh_(detail::gate_preact(t, x, h, params[0], params[1], params[2]));
                break;
            }
            case EncoderKind::GRU: {
                Var z = t.sigmoid(detail::gate_preact(t, x, h, params[0], params[1], params[2]));
                Var r = t.sigmoid(detail::gate_preact(t, x, h, params[3], params[4], params[5]));
                Var rh = t.hadamard(r, h);
                Var cand = t.tanh_(detail::gate_preact(t, x, rh, params[6], params[7], params[8]));
                Var keep = t.hadamard(t.affine(z, -1.0, 1.0), h);
                h = t.add(keep, t.hadamard(z, cand));
                break;
            }
            case EncoderKind::LSTM: {
                Var i = t.sigmoid(detail::gate_preact(t, x, h, params[0], params[1], params[2]));
                Var f = t.sigmoid(detail::gate_preact(t, x, h, params[3], params[4], params[5]));
                Var o = t.sigmoid(detail::gate_preact(t, x, h, params[6], params[7], params[8]));
                Var g = t.tanh_(detail::gate_preact(t, x, h, params[9], params[10], params[11]));
                c = t.add(t.hadamard(f, c), t.hadamard(i, g));
                h = t.hadamard(o, t.tanh_(c));
                break;
            }
            case EncoderKind::None: break;
        }
    }
    return h;
}

} // namespace epicast
