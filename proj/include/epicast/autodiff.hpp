#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "epicast/common.hpp"

namespace epicast {

using Mat = Eigen::MatrixXd;

/// Handle to a node on a Tape.
struct Var {
    int idx = -1;
};

/// Reverse-mode automatic differentiation over dense double matrices.
/// One Tape records one scalar-valued computation; backward() fills per-node
/// gradients in reverse topological (creation) order. Tapes are cheap and
/// meant to be discarded after each example.
class Tape {
  public:
    Var leaf(Mat value, bool need_grad) {
        return push(std::move(value), need_grad, {});
    }

    const Mat& value(Var v) const { return nodes_[check(v)].value; }

    /// Gradient of the backward()-seeded scalar w.r.t. node v (zero matrix if
    /// the node was never touched).
    Mat grad(Var v) const {
        const Node& n = nodes_[check(v)];
        if (n.grad.size() == 0) return Mat::Zero(n.value.rows(), n.value.cols());
        return n.grad;
    }

    // --- arithmetic ---------------------------------------------------------

    Var add(Var a, Var b) {
        const Mat& x = value(a);
        const Mat& y = value(b);
        require(x.rows() == y.rows() && x.cols() == y.cols(), "add shapes");
        Var out = push(x + y, needs(a) || needs(b), [this, a, b](const Mat& g) {
            accumulate(a, g);
            accumulate(b, g);
        });
        return out;
    }

    /// Broadcast-add a 1 x n row vector to every row of a.
    Var add_rowvec(Var a, Var v) {
        const Mat& x = value(a);
        const Mat& r = value(v);
        require(r.rows() == 1 && r.cols() == x.cols(), "add_rowvec shapes");
        Mat y = x;
        y.rowwise() += r.row(0);
        return push(std::move(y), needs(a) || needs(v), [this, a, v](const Mat& g) {
            accumulate(a, g);
            accumulate(v, g.colwise().sum());
        });
    }

    /// Elementwise alpha * a + beta.
    Var affine(Var a, double alpha, double beta) {
        Mat y = (alpha * value(a).array() + beta).matrix();
        return push(std::move(y), needs(a), [this, a, alpha](const Mat& g) {
            accumulate(a, (alpha * g.array()).matrix());
        });
    }

    Var hadamard(Var a, Var b) {
        const Mat& x = value(a);
        const Mat& y = value(b);
        require(x.rows() == y.rows() && x.cols() == y.cols(), "hadamard shapes");
        return push((x.array() * y.array()).matrix(), needs(a) || needs(b),
                    [this, a, b](const Mat& g) {
                        accumulate(a, (g.array() * value(b).array()).matrix());
                        accumulate(b, (g.array() * value(a).array()).matrix());
                    });
    }

    Var matmul(Var a, Var b) {
        const Mat& x = value(a);
        const Mat& y = value(b);
        require(x.cols() == y.rows(), "matmul shapes");
        return push(x * y, needs(a) || needs(b), [this, a, b](const Mat& g) {
            accumulate(a, g * value(b).transpose());
            accumulate(b, value(a).transpose() * g);
        });
    }

    /// a * b^T
    Var matmul_nt(Var a, Var b) {
        const Mat& x = value(a);
        const Mat& y = value(b);
        require(x.cols() == y.cols(), "matmul_nt shapes");
        return push(x * y.transpose(), needs(a) || needs(b), [this, a, b](const Mat& g) {
            accumulate(a, g * value(b));
            accumulate(b, g.transpose() * value(a));
        });
    }

    // --- nonlinearities ------------------------------------------------------

    Var sigmoid(Var a) {
        Mat y = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
        Var out = push(std::move(y), needs(a), {});
        nodes_[out.idx].backward = [this, a, out](const Mat& g) {
            const auto& s = value(out).array();
            accumulate(a, (g.array() * s * (1.0 - s)).matrix());
        };
        return out;
    }

    Var tanh_(Var a) {
        Mat y = value(a).array().tanh().matrix();
        Var out = push(std::move(y), needs(a), {});
        nodes_[out.idx].backward = [this, a, out](const Mat& g) {
            const auto& t = value(out).array();
            accumulate(a, (g.array() * (1.0 - t * t)).matrix());
        };
        return out;
    }

    /// Exact (erf-based) GELU; smooth, so finite-difference checks stay tight.
    Var gelu(Var a) {
        const Mat& x = value(a);
        Mat y = x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); });
        return push(std::move(y), needs(a), [this, a](const Mat& g) {
            const Mat& x2 = value(a);
            Mat d = x2.unaryExpr([](double v) {
                const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
                const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
                return cdf + v * pdf;
            });
            accumulate(a, (g.array() * d.array()).matrix());
        });
    }

    // --- shape ops -----------------------------------------------------------

    /// Row i as a 1 x n matrix.
    Var row(Var a, int i) {
        const Mat& x = value(a);
        require(i >= 0 && i < x.rows(), "row index");
        return push(x.row(i), needs(a), [this, a, i](const Mat& g) {
            Mat d = Mat::Zero(value(a).rows(), value(a).cols());
            d.row(i) = g.row(0);
            accumulate(a, d);
        });
    }

    Var slice_cols(Var a, int c0, int n) {
        const Mat& x = value(a);
        require(c0 >= 0 && n > 0 && c0 + n <= x.cols(), "slice_cols range");
        return push(x.middleCols(c0, n), needs(a), [this, a, c0, n](const Mat& g) {
            Mat d = Mat::Zero(value(a).rows(), value(a).cols());
            d.middleCols(c0, n) = g;
            accumulate(a, d);
        });
    }

    Var concat_cols(const std::vector<Var>& parts) {
        require(!parts.empty(), "concat_cols empty");
        long rows = value(parts[0]).rows(), cols = 0;
        bool any = false;
        for (Var p : parts) {
            require(value(p).rows() == rows, "concat_cols rows");
            cols += value(p).cols();
            any = any || needs(p);
        }
        Mat y(rows, cols);
        long at = 0;
        for (Var p : parts) {
            y.middleCols(at, value(p).cols()) = value(p);
            at += value(p).cols();
        }
        std::vector<Var> ps = parts;
        return push(std::move(y), any, [this, ps](const Mat& g) {
            long at2 = 0;
            for (Var p : ps) {
                accumulate(p, g.middleCols(at2, value(p).cols()));
                at2 += value(p).cols();
            }
        });
    }

    /// Replace row s of a with the 1 x n row vector v.
    Var set_row(Var a, Var v, int s) {
        const Mat& x = value(a);
        const Mat& r = value(v);
        if (s < 0 || s >= x.rows())
            fail(Errc::IndexOutOfRange, "set_row index " + std::to_string(s));
        if (r.rows() != 1 || r.cols() != x.cols())
            fail(Errc::DimensionMismatch, "set_row vector width");
        Mat y = x;
        y.row(s) = r.row(0);
        return push(std::move(y), needs(a) || needs(v), [this, a, v, s](const Mat& g) {
            Mat d = g;
            d.row(s).setZero();
            accumulate(a, d);
            accumulate(v, g.row(s));
        });
    }

    /// Rows of `table` selected by ids; backward scatter-adds.
    Var gather_rows(Var table, std::vector<int> ids) {
        const Mat& x = value(table);
        Mat y(static_cast<long>(ids.size()), x.cols());
        for (std::size_t j = 0; j < ids.size(); ++j) {
            if (ids[j] < 0 || ids[j] >= x.rows())
                fail(Errc::IdOutOfRange, "gather id " + std::to_string(ids[j]));
            y.row(static_cast<long>(j)) = x.row(ids[j]);
        }
        return push(std::move(y), needs(table), [this, table, ids](const Mat& g) {
            Mat d = Mat::Zero(value(table).rows(), value(table).cols());
            for (std::size_t j = 0; j < ids.size(); ++j)
                d.row(ids[j]) += g.row(static_cast<long>(j));
            accumulate(table, d);
        });
    }

    // --- fused ops -----------------------------------------------------------

    /// Row-wise layer normalization with learnable gain/bias (1 x n each).
    Var layer_norm(Var a, Var gamma, Var beta, double eps = 1e-5) {
        const Mat& x = value(a);
        const Mat& gm = value(gamma);
        const Mat& bt = value(beta);
        require(gm.rows() == 1 && gm.cols() == x.cols(), "layer_norm gamma");
        require(bt.rows() == 1 && bt.cols() == x.cols(), "layer_norm beta");
        const long n = x.cols();
        Mat xhat(x.rows(), n);
        Eigen::VectorXd inv_sigma(x.rows());
        for (long i = 0; i < x.rows(); ++i) {
            const double mu = x.row(i).mean();
            const double var = (x.row(i).array() - mu).square().sum() / static_cast<double>(n);
            inv_sigma(i) = 1.0 / std::sqrt(var + eps);
            xhat.row(i) = (x.row(i).array() - mu) * inv_sigma(i);
        }
        Mat y = (xhat.array().rowwise() * gm.row(0).array()).rowwise() + bt.row(0).array();
        return push(std::move(y), needs(a) || needs(gamma) || needs(beta),
                    [this, a, gamma, beta, xhat, inv_sigma](const Mat& g) {
                        const long n2 = xhat.cols();
                        accumulate(beta, g.colwise().sum());
                        accumulate(gamma, (g.array() * xhat.array()).colwise().sum().matrix());
                        Mat dxhat = g.array().rowwise() * value(gamma).row(0).array();
                        Mat dx(xhat.rows(), n2);
                        for (long i = 0; i < xhat.rows(); ++i) {
                            const double s1 = dxhat.row(i).sum();
                            const double s2 = (dxhat.row(i).array() * xhat.row(i).array()).sum();
                            dx.row(i) = inv_sigma(i) *
                                        (dxhat.row(i).array() - s1 / static_cast<double>(n2) -
                                         xhat.row(i).array() * s2 / static_cast<double>(n2));
                        }
                        accumulate(a, dx);
                    });
    }

    /// Causal row softmax on a square score matrix: row i is a softmax over
    /// columns 0..i; columns above the diagonal get probability zero.
    Var causal_softmax(Var scores) {
        const Mat& s = value(scores);
        require(s.rows() == s.cols(), "causal_softmax square");
        Mat p = Mat::Zero(s.rows(), s.cols());
        for (long i = 0; i < s.rows(); ++i) {
            const double m = s.row(i).head(i + 1).maxCoeff();
            Eigen::ArrayXd e = (s.row(i).head(i + 1).array() - m).exp();
            p.row(i).head(i + 1) = (e / e.sum()).matrix();
        }
        Var out = push(std::move(p), needs(scores), {});
        nodes_[out.idx].backward = [this, scores, out](const Mat& g) {
            const Mat& p2 = value(out);
            Mat d(p2.rows(), p2.cols());
            for (long i = 0; i < p2.rows(); ++i) {
                const double dot = (g.row(i).array() * p2.row(i).array()).sum();
                d.row(i) = (p2.row(i).array() * (g.row(i).array() - dot)).matrix();
            }
            accumulate(scores, d);
        };
        return out;
    }

    /// Cross-entropy of `target` (index into `class_ids`) under the softmax of
    /// the named logits only. logits is 1 x V; the result is 1 x 1.
    Var restricted_ce(Var logits, const std::vector<int>& class_ids, int target) {
        const Mat& l = value(logits);
        require(l.rows() == 1, "restricted_ce expects a row");
        require(target >= 0 && target < static_cast<int>(class_ids.size()), "target range");
        Eigen::ArrayXd sub(static_cast<long>(class_ids.size()));
        for (std::size_t k = 0; k < class_ids.size(); ++k) {
            require(class_ids[k] >= 0 && class_ids[k] < l.cols(), "class id range");
            sub(static_cast<long>(k)) = l(0, class_ids[k]);
        }
        const double m = sub.maxCoeff();
        const Eigen::ArrayXd e = (sub - m).exp();
        const Eigen::ArrayXd p = e / e.sum();
        Mat loss(1, 1);
        loss(0, 0) = -std::log(p(target));
        std::vector<int> ids = class_ids;
        Eigen::ArrayXd probs = p;
        return push(std::move(loss), needs(logits),
                    [this, logits, ids, probs, target](const Mat& g) {
                        Mat d = Mat::Zero(1, value(logits).cols());
                        for (std::size_t k = 0; k < ids.size(); ++k)
                            d(0, ids[k]) = g(0, 0) * (probs(static_cast<long>(k)) -
                                                      (static_cast<int>(k) == target ? 1.0 : 0.0));
                        accumulate(logits, d);
                    });
    }

    // --- reverse pass --------------------------------------------------------

    /// Seeds d(scalar)/d(scalar) = 1 at `loss` (must be 1 x 1) and propagates.
    void backward(Var loss) {
        Node& last = nodes_[check(loss)];
        require(last.value.rows() == 1 && last.value.cols() == 1, "backward needs a scalar");
        ensure_grad(loss.idx);
        nodes_[loss.idx].grad(0, 0) = 1.0;
        for (int i = loss.idx; i >= 0; --i) {
            Node& n = nodes_[static_cast<std::size_t>(i)];
            if (!n.need_grad || n.grad.size() == 0 || !n.backward) continue;
            n.backward(n.grad);
        }
    }

    std::size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Mat value;
        Mat grad; // empty until first accumulation
        bool need_grad = false;
        std::function<void(const Mat&)> backward; // empty for leaves
    };

    static constexpr double kInvSqrt2 = 0.70710678118654752440;
    static constexpr double kInvSqrt2Pi = 0.39894228040143267794;

    std::vector<Node> nodes_;

    int check(Var v) const {
        if (v.idx < 0 || v.idx >= static_cast<int>(nodes_.size()))
            fail(Errc::IndexOutOfRange, "bad tape handle");
        return v.idx;
    }

    bool needs(Var v) const { return nodes_[check(v)].need_grad; }

    static void require(bool ok, const char* what) {
        if (!ok) fail(Errc::ShapeMismatch, what);
    }

    void ensure_grad(int idx) {
        Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    }

    void accumulate(Var v, const Mat& g) {
        if (!needs(v)) return;
        ensure_grad(v.idx);
        nodes_[static_cast<std::size_t>(v.idx)].grad += g;
    }

    Var push(Mat value, bool need_grad, std::function<void(const Mat&)> backward) {
        Node n;
        n.value = std::move(value);
        n.need_grad = need_grad;
        n.backward = std::move(backward);
        nodes_.push_back(std::move(n));
        return {static_cast<int>(nodes_.size()) - 1};
    }
};

} // namespace epicast
