#pragma once
// Reverse-mode autodiff over dense double matrices. A Tape owns a DAG of
// matrix-valued nodes built by the op methods below; backward() runs once
// from a 1x1 scalar root. Built per training step and discarded.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <vector>

namespace tagembed::ad {

using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

struct Var {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

// Per-query softmax index sets over rows of a similarity matrix.
// `row` is the query's row, `candidates` the softmax support columns,
// `positives` the numerator columns (subset of candidates).
struct SoftmaxSets {
    int row = -1;
    std::vector<int> candidates;
    std::vector<int> positives;
};

class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Mat value, bool requires_grad = false);

    const Mat& value(Var v) const { return nodes_[static_cast<std::size_t>(v.idx)].value; }
    // Valid after backward(); zero matrix if the node was never reached.
    const Mat& grad(Var v);

    void backward(Var scalar_root);

    // --- elementwise / structural ---
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var hadamard(Var a, Var b);
    Var scale(Var a, double s);
    Var add_const(Var a, const Mat& c);
    Var hadamard_const(Var a, const Mat& c);  // dropout masks, etc.
    Var add_rowvec(Var a, Var row);           // broadcast 1xD bias over rows
    Var gather_rows(Var a, std::vector<int> idx);
    Var rows(Var a, int from, int count);  // contiguous row block
    Var concat_rows(const std::vector<Var>& parts);
    Var cols(Var a, int from, int count);
    Var concat_cols(const std::vector<Var>& parts);
    Var sum_all(Var a);  // 1x1 sum of all entries

    // --- linear algebra ---
    Var matmul(Var a, Var b);
    Var matmul_nt(Var a, Var b);  // a * b^T
    Var spmm(std::shared_ptr<const SpMat> a, Var x);

    // --- nonlinearities ---
    Var relu(Var a);
    Var tanh_act(Var a);
    Var gelu(Var a);  // exact erf form
    Var layernorm(Var a, Var gamma, Var beta, double eps = 1e-5);
    // Row softmax of (a + mask); -inf mask entries give exactly-zero weights.
    Var softmax_rows(Var a, std::shared_ptr<const Mat> additive_mask = nullptr);
    // Fused multi-head self-attention over one sequence: q, k, v are T x d
    // with d split into num_heads column groups; the additive mask (T x T,
    // -inf on padded key columns) is applied to every head's logits.
    Var multihead_attention(Var q, Var k, Var v, int num_heads, double scale,
                            std::shared_ptr<const Mat> additive_mask);

    // --- losses / similarity ---
    // Rows scaled to unit L2 norm; norms below eps are clamped to eps.
    Var row_normalize(Var a, double eps = 1e-8);
    // Mean over queries of mean over positives of -log softmax(sim/tau).
    Var infonce_set(Var sim, std::shared_ptr<const std::vector<SoftmaxSets>> sets, double tau);
    // Bidirectional cross-modal variant: row direction uses cross[row, :],
    // column direction cross[:, row]; the two log-softmax terms are halved.
    Var ndka_set(Var cross, std::shared_ptr<const std::vector<SoftmaxSets>> sets, double tau);
    // Mean over queries of symmetrized KL between softmax(sa/tau) and
    // softmax(sb/tau) over each query's candidate set.
    Var sym_kl_set(Var sa, Var sb, std::shared_ptr<const std::vector<SoftmaxSets>> sets, double tau);
    // Mean cross-entropy of row softmax against integer targets.
    Var softmax_xent_rows(Var logits, std::vector<int> targets);

    std::size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Mat value;
        Mat grad;
        bool requires_grad = false;
        bool grad_init = false;
        std::function<void(Tape&)> backward;
    };

    Var push(Mat value, bool requires_grad, std::function<void(Tape&)> backward);
    Mat& grad_ref(int idx);
    void accumulate(int idx, const Mat& g);
    bool needs(Var v) const { return nodes_[static_cast<std::size_t>(v.idx)].requires_grad; }

    std::vector<Node> nodes_;
};

}  // namespace tagembed::ad
