#include "tagembed/autodiff.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tagembed::ad {

Var Tape::push(Mat value, bool requires_grad, std::function<void(Tape&)> backward) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Mat value, bool requires_grad) {
    return push(std::move(value), requires_grad, nullptr);
}

Mat& Tape::grad_ref(int idx) {
    Node& n = nodes_[static_cast<std::size_t>(idx)];
    if (!n.grad_init) {
        n.grad = Mat::Zero(n.value.rows(), n.value.cols());
        n.grad_init = true;
    }
    return n.grad;
}

void Tape::accumulate(int idx, const Mat& g) {
    if (!nodes_[static_cast<std::size_t>(idx)].requires_grad) return;
    grad_ref(idx) += g;
}

const Mat& Tape::grad(Var v) { return grad_ref(v.idx); }

void Tape::backward(Var scalar_root) {
    const Node& root = nodes_[static_cast<std::size_t>(scalar_root.idx)];
    if (root.value.rows() != 1 || root.value.cols() != 1) {
        throw std::invalid_argument("backward root must be a 1x1 scalar");
    }
    grad_ref(scalar_root.idx).setOnes();
    for (int i = scalar_root.idx; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.requires_grad || !n.grad_init || !n.backward) continue;
        n.backward(*this);
    }
}

Var Tape::add(Var a, Var b) {
    Mat v = value(a) + value(b);
    return push(std::move(v), needs(a) || needs(b), [a, b, out = size()](Tape& t) {
        const Mat& g = t.grad_ref(static_cast<int>(out));
        t.accumulate(a.idx, g);
        t.accumulate(b.idx, g);
    });
}

Var Tape::sub(Var a, Var b) {
    Mat v = value(a) - value(b);
    return push(std::move(v), needs(a) || needs(b), [a, b, out = size()](Tape& t) {
        const Mat& g = t.grad_ref(static_cast<int>(out));
        t.accumulate(a.idx, g);
        t.accumulate(b.idx, -g);
    });
}

Var Tape::hadamard(Var a, Var b) {
    Mat v = value(a).cwiseProduct(value(b));
    return push(std::move(v), needs(a) || needs(b), [a, b, out = size()](Tape& t) {
        const Mat& g = t.grad_ref(static_cast<int>(out));
        t.accumulate(a.idx, g.cwiseProduct(t.value(b)));
        t.accumulate(b.idx, g.cwiseProduct(t.value(a)));
    });
}

Var Tape::scale(Var a, double s) {
    Mat v = value(a) * s;
    return push(std::move(v), needs(a), [a, s, out = size()](Tape& t) {
        t.accumulate(a.idx, t.grad_ref(static_cast<int>(out)) * s);
    });
}

Var Tape::add_const(Var a, const Mat& c) {
    Mat v = value(a) + c;
    return push(std::move(v), needs(a), [a, out = size()](Tape& t) {
        t.accumulate(a.idx, t.grad_ref(static_cast<int>(out)));
    });
}

Var Tape::hadamard_const(Var a, const Mat& c) {
    Mat v = value(a).cwiseProduct(c);
    return push(std::move(v), needs(a), [a, c, out = size()](Tape& t) {
        t.accumulate(a.idx, t.grad_ref(static_cast<int>(out)).cwiseProduct(c));
    });
}

Var Tape::add_rowvec(Var a, Var row) {
    if (value(row).rows() != 1 || value(row).cols() != value(a).cols()) {
        throw std::invalid_argument("add_rowvec: bias must be 1 x cols(a)");
    }
    Mat v = value(a).rowwise() + value(row).row(0);
    return push(std::move(v), needs(a) || needs(row), [a, row, out = size()](Tape& t) {
        const Mat& g = t.grad_ref(static_cast<int>(out));
        t.accumulate(a.idx, g);
        t.accumulate(row.idx, g.colwise().sum());
    });
}

Var Tape::gather_rows(Var a, std::vector<int> idx) {
    const Mat& src = value(a);
    Mat v(static_cast<Eigen::Index>(idx.size()), src.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        v.row(static_cast<Eigen::Index>(r)) = src.row(idx[r]);
    }
    return push(std::move(v), needs(a), [a, idx = std::move(idx), out = size()](Tape& t) {
        const Mat& g = t.grad_ref(static_cast<int>(out));
        if (!t.needs(a)) return;
        Mat& ga = t.grad_ref(a.idx);
        for (std::size_t r = 0; r < idx.size(); ++r) {
            ga.row(idx[r]) += g.row(static_cast<Eigen::Index>(r));
        }
    });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
    Eigen::Index rows = 0;
    const Eigen::Index cols = value(parts[0]).cols();
    bool req = false;
    for (const Var p : parts) {
        rows += value(p).rows();
        req = req || needs(p);
    }
    Mat v(rows, cols);
    Eigen::Index at = 0;
    for (const Var p : parts) {
        v.middleRows(at, value(p).rows()) = value(p);
        at += value(p).rows();
    }
    return push(std::move(v), req, [parts, out = size()](Tape& t) {
        const Mat& g = t.grad_ref(static_cast<int>(out));
        Eigen::Index at = 0;
        for (const Var p : parts) {
            const Eigen::Index r = t.value(p).rows();
            t.accumulate(p.idx, g.middleRows(at, r));
            at += r;
        }
    });
}

Var Tape::cols(Var a, int from, int count) {
    Mat v = value(a).middleCols(from, count);
    return push(std::move(v), needs(a), [a, from, count, out = size()](Tape& t) {
        if (!t.needs(a)) return;
        t.grad_ref(a.idx).middleCols(from, count) += t.grad_ref(static_cast<int>(out));
    });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
    const Eigen::Index rows = value(parts[0]).rows();
    Eigen::Index cols = 0;
    bool req = false;
    for (const Var p : parts) {
        cols += value(p).cols();
        req = req || needs(p);
    }
    Mat v(rows, cols);
    Eigen::Index at = 0;
    for (const Var p : parts) {
        v.middleCols(at, value(p).cols()) = value(p);
        at += value(p).cols();
    }
    return push(std::move(v), req, [parts, out = size()](Tape& t) {
        const Mat& g = t.grad_ref(static_cast<int>(out));
        Eigen::Index at = 0;
        for (const Var p : parts) {
            const Eigen::Index c = t.value(p).cols();
            t.accumulate(p.idx, g.middleCols(at, c));
            at += c;
        }
    });
}

Var Tape::rows(Var a, int from, int count) {
    Mat v = value(a).middleRows(from, count);
    return push(std::move(v), needs(a), [a, from, count, out = size()](Tape& t) {
        if (!t.needs(a)) return;
        t.grad_ref(a.idx).middleRows(from, count) += t.grad_ref(static_cast<int>(out));
    });
}

Var Tape::sum_all(Var a) {
    Mat v(1, 1);
    v(0, 0) = value(a).sum();
    return push(std::move(v), needs(a), [a, out = size()](Tape& t) {
        const double g = t.grad_ref(static_cast<int>(out))(0, 0);
        const Mat& x = t.value(a);
        t.accumulate(a.idx, Mat::Constant(x.rows(), x.cols(), g));
    });
}

Var Tape::matmul(Var a, Var b) {
    Mat v = value(a) * value(b);
    return push(std::move(v), needs(a) || needs(b), [a, b, out = size()](Tape& t) {
        const Mat& g = t.grad_ref(static_cast<int>(out));
        if (t.needs(a)) t.accumulate(a.idx, g * t.value(b).transpose());
        if (t.needs(b)) t.accumulate(b.idx, t.value(a).transpose() * g);
    });
}

Var Tape::matmul_nt(Var a, Var b) {
    Mat v = value(a) * value(b).transpose();
    return push(std::move(v), needs(a) || needs(b), [a, b, out = size()](Tape& t) {
        const Mat& g = t.grad_ref(static_cast<int>(out));
        if (t.needs(a)) t.accumulate(a.idx, g * t.value(b));
        if (t.needs(b)) t.accumulate(b.idx, g.transpose() * t.value(a));
    });
}

Var Tape::spmm(std::shared_ptr<const SpMat> a, Var x) {
    Mat v = (*a) * value(x);
    return push(std::move(v), needs(x), [a, x, out = size()](Tape& t) {
        if (t.needs(x)) t.accumulate(x.idx, a->transpose() * t.grad_ref(static_cast<int>(out)));
    });
}

Var Tape::relu(Var a) {
    Mat v = value(a).cwiseMax(0.0);
    return push(std::move(v), needs(a), [a, out = size()](Tape& t) {
        const Mat mask = (t.value(a).array() > 0.0).cast<double>().matrix();
        t.accumulate(a.idx, t.grad_ref(static_cast<int>(out)).cwiseProduct(mask));
    });
}

Var Tape::tanh_act(Var a) {
    Mat v = value(a).array().tanh().matrix();
    return push(std::move(v), needs(a), [a, out = size()](Tape& t) {
        const Mat& y = t.value(Var{static_cast<int>(out)});
        const Mat d = (1.0 - y.array().square()).matrix();
        t.accumulate(a.idx, t.grad_ref(static_cast<int>(out)).cwiseProduct(d));
    });
}

Var Tape::gelu(Var a) {
    constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    Mat v = value(a).unaryExpr(
        [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); });
    return push(std::move(v), needs(a), [a, out = size()](Tape& t) {
        const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        const Mat d = t.value(a).unaryExpr([inv_sqrt2pi](double x) {
            return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) +
                   x * inv_sqrt2pi * std::exp(-0.5 * x * x);
        });
        t.accumulate(a.idx, t.grad_ref(static_cast<int>(out)).cwiseProduct(d));
    });
}

Var Tape::layernorm(Var a, Var gamma, Var beta, double eps) {
    const Mat& x = value(a);
    const Eigen::Index d = x.cols();
    Mat xhat(x.rows(), d);
    Eigen::VectorXd inv_std(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mu = x.row(r).mean();
        const double var = (x.row(r).array() - mu).square().mean();
        const double istd = 1.0 / std::sqrt(var + eps);
        inv_std(r) = istd;
        xhat.row(r) = (x.row(r).array() - mu).matrix() * istd;
    }
    Mat v = (xhat.array().rowwise() * value(gamma).row(0).array()).matrix();
    v = (v.array().rowwise() + value(beta).row(0).array()).matrix();
    return push(std::move(v), needs(a) || needs(gamma) || needs(beta),
                [a, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std),
                 out = size()](Tape& t) {
                    const Mat& g = t.grad_ref(static_cast<int>(out));
                    if (t.needs(gamma)) t.accumulate(gamma.idx, g.cwiseProduct(xhat).colwise().sum());
                    if (t.needs(beta)) t.accumulate(beta.idx, g.colwise().sum());
                    if (!t.needs(a)) return;
                    using RowArr = Eigen::Array<double, 1, Eigen::Dynamic>;
                    const RowArr grow = t.value(gamma).row(0).array();
                    Mat gx(g.rows(), g.cols());
                    for (Eigen::Index r = 0; r < g.rows(); ++r) {
                        const RowArr dxhat = g.row(r).array() * grow;
                        const RowArr xh = xhat.row(r).array();
                        const double m1 = dxhat.mean();
                        const double m2 = (dxhat * xh).mean();
                        gx.row(r) = ((dxhat - m1 - xh * m2) * inv_std(r)).matrix();
                    }
                    t.accumulate(a.idx, gx);
                });
}

Var Tape::softmax_rows(Var a, std::shared_ptr<const Mat> additive_mask) {
    const Mat& x = value(a);
    Mat p(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        Eigen::RowVectorXd logits = x.row(r);
        if (additive_mask) logits += additive_mask->row(r);
        const double mx = logits.maxCoeff();
        if (!std::isfinite(mx)) {
            throw std::runtime_error("softmax_rows: fully masked row");
        }
        Eigen::RowVectorXd e = (logits.array() - mx).exp();
        p.row(r) = e / e.sum();
    }
    return push(std::move(p), needs(a), [a, out = size()](Tape& t) {
        const Mat& p = t.value(Var{static_cast<int>(out)});
        const Mat& g = t.grad_ref(static_cast<int>(out));
        Mat gx(p.rows(), p.cols());
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            const double dot = g.row(r).dot(p.row(r));
            gx.row(r) = ((g.row(r).array() - dot) * p.row(r).array()).matrix();
        }
        t.accumulate(a.idx, gx);
    });
}

Var Tape::multihead_attention(Var q, Var k, Var v, int num_heads, double scale,
                              std::shared_ptr<const Mat> additive_mask) {
    const Mat& qv = value(q);
    const Mat& kv = value(k);
    const Mat& vv = value(v);
    const Eigen::Index t_len = qv.rows();
    const Eigen::Index d = qv.cols();
    if (kv.rows() != t_len || vv.rows() != t_len || kv.cols() != d || vv.cols() != d) {
        throw std::invalid_argument("multihead_attention: q/k/v shape mismatch");
    }
    if (num_heads < 1 || d % num_heads != 0) {
        throw std::invalid_argument("multihead_attention: heads must divide width");
    }
    const Eigen::Index dh = d / num_heads;

    // Per-head attention weights, kept for the backward pass.
    auto probs = std::make_shared<std::vector<Mat>>();
    probs->reserve(static_cast<std::size_t>(num_heads));
    Mat out(t_len, d);
    for (int h = 0; h < num_heads; ++h) {
        Mat logits = qv.middleCols(h * dh, dh) * kv.middleCols(h * dh, dh).transpose() * scale;
        if (additive_mask) logits += *additive_mask;
        Mat p(t_len, t_len);
        for (Eigen::Index r = 0; r < t_len; ++r) {
            const double mx = logits.row(r).maxCoeff();
            if (!std::isfinite(mx)) throw std::runtime_error("multihead_attention: fully masked row");
            Eigen::RowVectorXd e = (logits.row(r).array() - mx).exp();
            p.row(r) = e / e.sum();
        }
        out.middleCols(h * dh, dh) = p * vv.middleCols(h * dh, dh);
        probs->push_back(std::move(p));
    }

    return push(std::move(out), needs(q) || needs(k) || needs(v),
                [q, k, v, num_heads, scale, dh, probs, out = size()](Tape& t) {
                    const Mat& g = t.grad_ref(static_cast<int>(out));
                    const Mat& qv = t.value(q);
                    const Mat& kv = t.value(k);
                    const Mat& vv = t.value(v);
                    Mat gq = Mat::Zero(qv.rows(), qv.cols());
                    Mat gk = Mat::Zero(kv.rows(), kv.cols());
                    Mat gv = Mat::Zero(vv.rows(), vv.cols());
                    for (int h = 0; h < num_heads; ++h) {
                        const Mat& p = (*probs)[static_cast<std::size_t>(h)];
                        const auto gout = g.middleCols(h * dh, dh);
                        const auto vh = vv.middleCols(h * dh, dh);
                        gv.middleCols(h * dh, dh) = p.transpose() * gout;
                        const Mat gp = gout * vh.transpose();
                        Mat gs(p.rows(), p.cols());
                        for (Eigen::Index r = 0; r < p.rows(); ++r) {
                            const double dot = gp.row(r).dot(p.row(r));
                            gs.row(r) = ((gp.row(r).array() - dot) * p.row(r).array()).matrix();
                        }
                        gq.middleCols(h * dh, dh) = gs * kv.middleCols(h * dh, dh) * scale;
                        gk.middleCols(h * dh, dh) = gs.transpose() * qv.middleCols(h * dh, dh) * scale;
                    }
                    t.accumulate(q.idx, gq);
                    t.accumulate(k.idx, gk);
                    t.accumulate(v.idx, gv);
                });
}

Var Tape::row_normalize(Var a, double eps) {
    const Mat& x = value(a);
    Mat v(x.rows(), x.cols());
    Eigen::VectorXd norms(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        norms(r) = x.row(r).norm();
        v.row(r) = x.row(r) / std::max(norms(r), eps);
    }
    return push(std::move(v), needs(a), [a, eps, norms = std::move(norms), out = size()](Tape& t) {
        if (!t.needs(a)) return;
        const Mat& y = t.value(Var{static_cast<int>(out)});
        const Mat& g = t.grad_ref(static_cast<int>(out));
        Mat gx(y.rows(), y.cols());
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
            if (norms(r) > eps) {
                const double dot = g.row(r).dot(y.row(r));
                gx.row(r) = (g.row(r) - dot * y.row(r)) / norms(r);
            } else {
                gx.row(r) = g.row(r) / eps;
            }
        }
        t.accumulate(a.idx, gx);
    });
}

namespace {

// Stable log-sum-exp and softmax over an index subset of a row.
void subset_softmax(const Mat& sim, int row, const std::vector<int>& cand, double tau,
                    bool column_direction, Eigen::VectorXd& probs, double& lse) {
    const std::size_t m = cand.size();
    Eigen::VectorXd logits(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
        const double s = column_direction ? sim(cand[k], row) : sim(row, cand[k]);
        logits(static_cast<Eigen::Index>(k)) = s / tau;
    }
    const double mx = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - mx).exp();
    const double z = e.sum();
    probs = e / z;
    lse = mx + std::log(z);
}

}  // namespace

Var Tape::infonce_set(Var sim, std::shared_ptr<const std::vector<SoftmaxSets>> sets, double tau) {
    if (sets->empty()) throw std::invalid_argument("infonce_set: no active queries");
    const Mat& s = value(sim);
    double total = 0.0;
    for (const auto& q : *sets) {
        if (q.positives.empty()) throw std::invalid_argument("infonce_set: query without positives");
        Eigen::VectorXd probs;
        double lse;
        subset_softmax(s, q.row, q.candidates, tau, false, probs, lse);
        double acc = 0.0;
        for (const int p : q.positives) acc += lse - s(q.row, p) / tau;
        total += acc / static_cast<double>(q.positives.size());
    }
    Mat v(1, 1);
    v(0, 0) = total / static_cast<double>(sets->size());
    return push(std::move(v), needs(sim), [sim, sets, tau, out = size()](Tape& t) {
        if (!t.needs(sim)) return;
        const double g = t.grad_ref(static_cast<int>(out))(0, 0);
        const Mat& s = t.value(sim);
        Mat& gs = t.grad_ref(sim.idx);
        const double inv_m = 1.0 / static_cast<double>(sets->size());
        for (const auto& q : *sets) {
            Eigen::VectorXd probs;
            double lse;
            subset_softmax(s, q.row, q.candidates, tau, false, probs, lse);
            const double w = g * inv_m / tau;
            for (std::size_t k = 0; k < q.candidates.size(); ++k) {
                gs(q.row, q.candidates[k]) += w * probs(static_cast<Eigen::Index>(k));
            }
            const double wp = w / static_cast<double>(q.positives.size());
            for (const int p : q.positives) gs(q.row, p) -= wp;
        }
    });
}

Var Tape::ndka_set(Var cross, std::shared_ptr<const std::vector<SoftmaxSets>> sets, double tau) {
    if (sets->empty()) throw std::invalid_argument("ndka_set: no active queries");
    const Mat& x = value(cross);
    double total = 0.0;
    for (const auto& q : *sets) {
        Eigen::VectorXd p_row, p_col;
        double lse_row, lse_col;
        subset_softmax(x, q.row, q.candidates, tau, false, p_row, lse_row);
        subset_softmax(x, q.row, q.candidates, tau, true, p_col, lse_col);
        double acc = 0.0;
        for (const int p : q.positives) {
            acc += 0.5 * (lse_row - x(q.row, p) / tau) + 0.5 * (lse_col - x(p, q.row) / tau);
        }
        total += acc / static_cast<double>(q.positives.size());
    }
    Mat v(1, 1);
    v(0, 0) = total / static_cast<double>(sets->size());
    return push(std::move(v), needs(cross), [cross, sets, tau, out = size()](Tape& t) {
        if (!t.needs(cross)) return;
        const double g = t.grad_ref(static_cast<int>(out))(0, 0);
        const Mat& x = t.value(cross);
        Mat& gx = t.grad_ref(cross.idx);
        const double inv_m = 1.0 / static_cast<double>(sets->size());
        for (const auto& q : *sets) {
            Eigen::VectorXd p_row, p_col;
            double lse_row, lse_col;
            subset_softmax(x, q.row, q.candidates, tau, false, p_row, lse_row);
            subset_softmax(x, q.row, q.candidates, tau, true, p_col, lse_col);
            const double w = 0.5 * g * inv_m / tau;
            for (std::size_t k = 0; k < q.candidates.size(); ++k) {
                gx(q.row, q.candidates[k]) += w * p_row(static_cast<Eigen::Index>(k));
                gx(q.candidates[k], q.row) += w * p_col(static_cast<Eigen::Index>(k));
            }
            const double wp = w / static_cast<double>(q.positives.size());
            for (const int p : q.positives) {
                gx(q.row, p) -= wp;
                gx(p, q.row) -= wp;
            }
        }
    });
}

Var Tape::sym_kl_set(Var sa, Var sb, std::shared_ptr<const std::vector<SoftmaxSets>> sets,
                     double tau) {
    if (sets->empty()) throw std::invalid_argument("sym_kl_set: no active queries");
    const Mat& a = value(sa);
    const Mat& b = value(sb);
    double total = 0.0;
    for (const auto& q : *sets) {
        Eigen::VectorXd p, r;
        double lse;
        subset_softmax(a, q.row, q.candidates, tau, false, p, lse);
        subset_softmax(b, q.row, q.candidates, tau, false, r, lse);
        double kl_pq = 0.0, kl_qp = 0.0;
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            kl_pq += p(k) * (std::log(p(k)) - std::log(r(k)));
            kl_qp += r(k) * (std::log(r(k)) - std::log(p(k)));
        }
        total += 0.5 * (kl_pq + kl_qp);
    }
    Mat v(1, 1);
    v(0, 0) = total / static_cast<double>(sets->size());
    return push(std::move(v), needs(sa) || needs(sb),
                [sa, sb, sets, tau, out = size()](Tape& t) {
                    const double g = t.grad_ref(static_cast<int>(out))(0, 0);
                    const Mat& a = t.value(sa);
                    const Mat& b = t.value(sb);
                    const double inv_m = 1.0 / static_cast<double>(sets->size());
                    for (const auto& q : *sets) {
                        Eigen::VectorXd p, r;
                        double lse;
                        subset_softmax(a, q.row, q.candidates, tau, false, p, lse);
                        subset_softmax(b, q.row, q.candidates, tau, false, r, lse);
                        double kl_pq = 0.0, kl_qp = 0.0;
                        for (Eigen::Index k = 0; k < p.size(); ++k) {
                            kl_pq += p(k) * (std::log(p(k)) - std::log(r(k)));
                            kl_qp += r(k) * (std::log(r(k)) - std::log(p(k)));
                        }
                        const double w = 0.5 * g * inv_m / tau;
                        for (std::size_t k = 0; k < q.candidates.size(); ++k) {
                            const auto ke = static_cast<Eigen::Index>(k);
                            const double logdiff = std::log(p(ke)) - std::log(r(ke));
                            if (t.needs(sa)) {
                                const double da = p(ke) * (logdiff - kl_pq) + (p(ke) - r(ke));
                                t.grad_ref(sa.idx)(q.row, q.candidates[k]) += w * da;
                            }
                            if (t.needs(sb)) {
                                const double db = r(ke) * (-logdiff - kl_qp) + (r(ke) - p(ke));
                                t.grad_ref(sb.idx)(q.row, q.candidates[k]) += w * db;
                            }
                        }
                    }
                });
}

Var Tape::softmax_xent_rows(Var logits, std::vector<int> targets) {
    const Mat& x = value(logits);
    if (static_cast<Eigen::Index>(targets.size()) != x.rows()) {
        throw std::invalid_argument("softmax_xent_rows: one target per row required");
    }
    double total = 0.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mx = x.row(r).maxCoeff();
        const double lse = mx + std::log((x.row(r).array() - mx).exp().sum());
        total += lse - x(r, targets[static_cast<std::size_t>(r)]);
    }
    Mat v(1, 1);
    v(0, 0) = total / static_cast<double>(x.rows());
    return push(std::move(v), needs(logits),
                [logits, targets = std::move(targets), out = size()](Tape& t) {
                    if (!t.needs(logits)) return;
                    const double g = t.grad_ref(static_cast<int>(out))(0, 0);
                    const Mat& x = t.value(logits);
                    Mat gx(x.rows(), x.cols());
                    for (Eigen::Index r = 0; r < x.rows(); ++r) {
                        const double mx = x.row(r).maxCoeff();
                        Eigen::RowVectorXd e = (x.row(r).array() - mx).exp();
                        gx.row(r) = e / e.sum();
                        gx(r, targets[static_cast<std::size_t>(r)]) -= 1.0;
                    }
                    t.accumulate(logits.idx, gx * (g / static_cast<double>(x.rows())));
                });
}

}  // namespace tagembed::ad
