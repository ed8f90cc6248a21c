#include <doctest.h>

#include <memory>

#include "tagembed/autodiff.hpp"
#include "tagembed/rng.hpp"

#include "../support/finite_diff.hpp"
#include "../support/random_batch.hpp"

using namespace tagembed;
using ad::Mat;
using ad::Tape;
using ad::Var;

namespace {

constexpr double kStep = 1e-5;
constexpr double kTol = 5e-6;  // well inside the 1e-4 acceptance bound

Mat randm(rng::Engine& eng, int r, int c) { return testgen::random_reps(eng, r, c); }

// Checks d(scalar(op(x)))/dx against central differences, where the scalar
// head is a fixed random weighting followed by sum.
void check_unary(const std::function<Var(Tape&, Var)>& op, Mat x, rng::Engine& eng) {
    Tape probe;
    const auto out_shape = probe.value(op(probe, probe.leaf(x)));
    const Mat w = randm(eng, static_cast<int>(out_shape.rows()), static_cast<int>(out_shape.cols()));

    const auto eval = [&]() {
        Tape t;
        Var v = op(t, t.leaf(x, true));
        return t.value(t.sum_all(t.hadamard_const(v, w)))(0, 0);
    };
    Tape t;
    Var leaf = t.leaf(x, true);
    Var root = t.sum_all(t.hadamard_const(op(t, leaf), w));
    t.backward(root);
    const Mat analytic = t.grad(leaf);
    CHECK(gradcheck::max_grad_error(x, analytic, kStep, eval) < kTol);
}

}  // namespace

TEST_CASE("elementwise and structural op gradients match finite differences") {
    auto eng = rng::make(71);
    check_unary([](Tape& t, Var a) { return t.scale(a, -1.7); }, randm(eng, 3, 4), eng);
    check_unary([](Tape& t, Var a) { return t.tanh_act(a); }, randm(eng, 3, 4), eng);
    check_unary([](Tape& t, Var a) { return t.gelu(a); }, randm(eng, 3, 4), eng);
    check_unary([](Tape& t, Var a) { return t.row_normalize(a); }, randm(eng, 4, 3), eng);
    check_unary([](Tape& t, Var a) { return t.softmax_rows(a); }, randm(eng, 3, 5), eng);
    check_unary([](Tape& t, Var a) { return t.gather_rows(a, {2, 0, 2}); }, randm(eng, 4, 3), eng);
    check_unary([](Tape& t, Var a) { return t.cols(a, 1, 2); }, randm(eng, 3, 4), eng);
    check_unary([](Tape& t, Var a) { return t.matmul_nt(a, a); }, randm(eng, 3, 4), eng);
    // relu away from the kink
    Mat x = randm(eng, 3, 4);
    x.array() += (x.array() >= 0).cast<double>() * 0.5 - (x.array() < 0).cast<double>() * 0.5;
    check_unary([](Tape& t, Var a) { return t.relu(a); }, x, eng);
}

TEST_CASE("binary op gradients match finite differences") {
    auto eng = rng::make(72);
    Mat a = randm(eng, 3, 4), b = randm(eng, 4, 2);
    const Mat w = randm(eng, 3, 2);
    const auto eval = [&]() {
        Tape t;
        Var r = t.matmul(t.leaf(a, true), t.leaf(b, true));
        return t.value(t.sum_all(t.hadamard_const(r, w)))(0, 0);
    };
    Tape t;
    Var va = t.leaf(a, true), vb = t.leaf(b, true);
    t.backward(t.sum_all(t.hadamard_const(t.matmul(va, vb), w)));
    CHECK(gradcheck::max_grad_error(a, t.grad(va), kStep, eval) < kTol);
    CHECK(gradcheck::max_grad_error(b, t.grad(vb), kStep, eval) < kTol);
}

TEST_CASE("layernorm gradients: input, gamma and beta") {
    auto eng = rng::make(73);
    Mat x = randm(eng, 3, 6);
    Mat gamma = randm(eng, 1, 6);
    Mat beta = randm(eng, 1, 6);
    const Mat w = randm(eng, 3, 6);
    const auto eval = [&]() {
        Tape t;
        Var r = t.layernorm(t.leaf(x, true), t.leaf(gamma, true), t.leaf(beta, true));
        return t.value(t.sum_all(t.hadamard_const(r, w)))(0, 0);
    };
    Tape t;
    Var vx = t.leaf(x, true), vg = t.leaf(gamma, true), vb = t.leaf(beta, true);
    t.backward(t.sum_all(t.hadamard_const(t.layernorm(vx, vg, vb), w)));
    CHECK(gradcheck::max_grad_error(x, t.grad(vx), kStep, eval) < kTol);
    CHECK(gradcheck::max_grad_error(gamma, t.grad(vg), kStep, eval) < kTol);
    CHECK(gradcheck::max_grad_error(beta, t.grad(vb), kStep, eval) < kTol);
}

TEST_CASE("fused attention gradients match finite differences") {
    auto eng = rng::make(78);
    const int t_len = 5, d = 6, heads = 2;
    Mat q = randm(eng, t_len, d), k = randm(eng, t_len, d), v = randm(eng, t_len, d);
    auto mask = std::make_shared<Mat>(Mat::Zero(t_len, t_len));
    mask->col(t_len - 1).setConstant(-std::numeric_limits<double>::infinity());
    const Mat w = randm(eng, t_len, d);
    const double scale = 1.0 / std::sqrt(3.0);

    const auto eval = [&]() {
        Tape t;
        Var r = t.multihead_attention(t.leaf(q, true), t.leaf(k, true), t.leaf(v, true), heads,
                                      scale, mask);
        return t.value(t.sum_all(t.hadamard_const(r, w)))(0, 0);
    };
    Tape t;
    Var vq = t.leaf(q, true), vk = t.leaf(k, true), vv = t.leaf(v, true);
    t.backward(t.sum_all(
        t.hadamard_const(t.multihead_attention(vq, vk, vv, heads, scale, mask), w)));
    CHECK(gradcheck::max_grad_error(q, t.grad(vq), kStep, eval) < kTol);
    CHECK(gradcheck::max_grad_error(k, t.grad(vk), kStep, eval) < kTol);
    CHECK(gradcheck::max_grad_error(v, t.grad(vv), kStep, eval) < kTol);
}

TEST_CASE("fused attention equals the composed per-head graph") {
    auto eng = rng::make(79);
    const int t_len = 4, d = 6, heads = 3, dh = 2;
    Mat q = randm(eng, t_len, d), k = randm(eng, t_len, d), v = randm(eng, t_len, d);
    auto mask = std::make_shared<Mat>(Mat::Zero(t_len, t_len));
    const double scale = 0.7;

    Tape t;
    const Mat fused =
        t.value(t.multihead_attention(t.leaf(q), t.leaf(k), t.leaf(v), heads, scale, mask));
    Var vq = t.leaf(q), vk = t.leaf(k), vv = t.leaf(v);
    std::vector<Var> heads_out;
    for (int h = 0; h < heads; ++h) {
        Var s = t.scale(t.matmul_nt(t.cols(vq, h * dh, dh), t.cols(vk, h * dh, dh)), scale);
        heads_out.push_back(t.matmul(t.softmax_rows(s, mask), t.cols(vv, h * dh, dh)));
    }
    const Mat composed = t.value(t.concat_cols(heads_out));
    CHECK((fused - composed).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("masked softmax zeroes masked columns exactly") {
    Tape t;
    Mat logits(2, 3);
    logits << 1.0, 2.0, 3.0, 0.5, 0.5, 0.5;
    auto mask = std::make_shared<Mat>(Mat::Zero(2, 3));
    mask->col(2).setConstant(-std::numeric_limits<double>::infinity());
    const Mat p = t.value(t.softmax_rows(t.leaf(logits), mask));
    CHECK(p(0, 2) == 0.0);
    CHECK(p(1, 2) == 0.0);
    CHECK(p.row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("spmm forward and backward agree with dense computation") {
    auto eng = rng::make(74);
    Mat dense(3, 3);
    dense << 0, 0.5, 0.5, 1, 0, 0, 0, 1, 0;
    auto sp = std::make_shared<ad::SpMat>(3, 3);
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            if (dense(r, c) != 0.0) trip.emplace_back(r, c, dense(r, c));
        }
    }
    sp->setFromTriplets(trip.begin(), trip.end());

    Mat x = randm(eng, 3, 4);
    const Mat w = randm(eng, 3, 4);
    const auto eval = [&]() {
        Tape t;
        Var r = t.spmm(sp, t.leaf(x, true));
        return t.value(t.sum_all(t.hadamard_const(r, w)))(0, 0);
    };
    Tape t;
    Var vx = t.leaf(x, true);
    Var r = t.spmm(sp, vx);
    CHECK((t.value(r) - dense * x).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    t.backward(t.sum_all(t.hadamard_const(r, w)));
    CHECK(gradcheck::max_grad_error(x, t.grad(vx), kStep, eval) < kTol);
}

TEST_CASE("loss op gradients w.r.t. similarity matrices match finite differences") {
    auto eng = rng::make(75);
    for (int trial = 0; trial < 5; ++trial) {
        const ContrastBatch batch = testgen::random_batch(eng);
        const int n = batch.num_slots();
        Mat sim = randm(eng, n, n);
        Mat sim_b = randm(eng, n, n);
        // Unbounded inputs here, so moderate temperatures keep central
        // differences well-conditioned; the sharp-tau regime is exercised
        // through the full losses, where inputs are bounded cosines.
        const double tau = trial % 2 == 0 ? 0.5 : 1.0;

        SUBCASE("") {}  // keep doctest happy about shared setup

        {
            const auto eval = [&]() {
                Tape t;
                return t.value(t.infonce_set(t.leaf(sim, true), batch.active_sets(false), tau))(0, 0);
            };
            Tape t;
            Var v = t.leaf(sim, true);
            t.backward(t.infonce_set(v, batch.active_sets(false), tau));
            CHECK(gradcheck::max_grad_error(sim, t.grad(v), kStep, eval) < kTol);
        }
        {
            const auto eval = [&]() {
                Tape t;
                return t.value(t.ndka_set(t.leaf(sim, true), batch.active_sets(true), tau))(0, 0);
            };
            Tape t;
            Var v = t.leaf(sim, true);
            t.backward(t.ndka_set(v, batch.active_sets(true), tau));
            CHECK(gradcheck::max_grad_error(sim, t.grad(v), kStep, eval) < kTol);
        }
        {
            const auto eval = [&]() {
                Tape t;
                return t.value(t.sym_kl_set(t.leaf(sim, true), t.leaf(sim_b, true),
                                            batch.active_sets(false), tau))(0, 0);
            };
            Tape t;
            Var va = t.leaf(sim, true);
            Var vb = t.leaf(sim_b, true);
            t.backward(t.sym_kl_set(va, vb, batch.active_sets(false), tau));
            CHECK(gradcheck::max_grad_error(sim, t.grad(va), kStep, eval) < kTol);
            const auto eval_b = [&]() {
                Tape t2;
                return t2.value(t2.sym_kl_set(t2.leaf(sim, true), t2.leaf(sim_b, true),
                                              batch.active_sets(false), tau))(0, 0);
            };
            CHECK(gradcheck::max_grad_error(sim_b, t.grad(vb), kStep, eval_b) < kTol);
        }
    }
}

TEST_CASE("softmax cross-entropy gradient matches finite differences") {
    auto eng = rng::make(76);
    Mat logits = randm(eng, 4, 3);
    const std::vector<int> targets{0, 2, 1, 2};
    const auto eval = [&]() {
        Tape t;
        return t.value(t.softmax_xent_rows(t.leaf(logits, true), targets))(0, 0);
    };
    Tape t;
    Var v = t.leaf(logits, true);
    t.backward(t.softmax_xent_rows(v, targets));
    CHECK(gradcheck::max_grad_error(logits, t.grad(v), kStep, eval) < kTol);
}

TEST_CASE("gradients accumulate across shared subexpressions") {
    // f(x) = sum(x * x^T) consumed twice via add
    auto eng = rng::make(77);
    Mat x = randm(eng, 3, 3);
    const auto eval = [&]() {
        Tape t;
        Var v = t.leaf(x, true);
        Var s = t.matmul_nt(v, v);
        return t.value(t.sum_all(t.add(s, s)))(0, 0);
    };
    Tape t;
    Var v = t.leaf(x, true);
    Var s = t.matmul_nt(v, v);
    t.backward(t.sum_all(t.add(s, s)));
    CHECK(gradcheck::max_grad_error(x, t.grad(v), kStep, eval) < kTol);
}
