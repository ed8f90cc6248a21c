#include <doctest.h>

#include <cmath>

#include "tagembed/losses.hpp"

#include "../support/finite_diff.hpp"
#include "../support/naive_losses.hpp"
#include "../support/random_batch.hpp"

using namespace tagembed;
using ad::Mat;

namespace {

// Batch with the given neighbor lists over queries 0..q-1 (ids beyond q-1
// become out-of-batch neighbor slots).
ContrastBatch batch_of(int num_queries, const std::vector<std::vector<NodeId>>& neighbors) {
    std::vector<NodeId> queries;
    for (int q = 0; q < num_queries; ++q) queries.push_back(q);
    return ContrastBatch::assemble(queries, neighbors);
}

Mat constant_rows(int n, int dim, double value = 1.0) {
    Mat m = Mat::Zero(n, dim);
    m.col(0).setConstant(value);
    return m;
}

// Unit row vectors whose cosine against (1, 0) equals the requested value.
Mat rows_with_sims_to_first(const std::vector<double>& sims) {
    Mat m(static_cast<Eigen::Index>(sims.size()) + 1, 2);
    m.row(0) << 1.0, 0.0;
    for (std::size_t i = 0; i < sims.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i) + 1) << sims[i],
            std::sqrt(std::max(0.0, 1.0 - sims[i] * sims[i]));
    }
    return m;
}

}  // namespace

TEST_CASE("cosine similarity identities") {
    Eigen::VectorXd a(2), b(2), c(2), d(2);
    a << 1, 0;
    b << 0, 1;
    c << 1, 1;
    d << 2, 2;
    CHECK(cosine_sim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine_sim(a, b) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cosine_sim(c, d) == doctest::Approx(1.0).epsilon(1e-12));
    Eigen::VectorXd e(3);
    e << 1, 2, 3;
    CHECK_THROWS_AS(cosine_sim(a, e), std::invalid_argument);
}

TEST_CASE("uniform similarities give ln|C(i)|") {
    SUBCASE("one positive, one negative") {
        const ContrastBatch b = batch_of(2, {{2}, {}});
        const double loss = gc_cl_loss(constant_rows(b.num_slots(), 3), b, 0.5);
        CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("one positive, three negatives") {
        const ContrastBatch b = batch_of(4, {{4}, {}, {}, {}});
        const double loss = gc_cl_loss(constant_rows(b.num_slots(), 3), b, 0.05);
        CHECK(loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    }
}

TEST_CASE("sharp-temperature contrastive loss matches direct scalar evaluation") {
    // query 0; negatives are batch members 1, 2; positive is slot 3.
    const ContrastBatch b = batch_of(3, {{3}, {}, {}});
    // slot sims against the query: neg 0.1, neg -0.2, pos 0.9
    const Mat reps = rows_with_sims_to_first({0.1, -0.2, 0.9});
    const double tau = 0.05;
    const double loss = gc_cl_loss(reps, b, tau);
    const double direct =
        -std::log(std::exp(0.9 / tau) /
                  (std::exp(0.9 / tau) + std::exp(0.1 / tau) + std::exp(-0.2 / tau)));
    CHECK(std::abs(loss - direct) < 1e-12);
    CHECK(loss == doctest::Approx(1.128e-7).epsilon(0.01));
}

TEST_CASE("nd_ka uniform two-node case equals ln 2") {
    const ContrastBatch b = batch_of(2, {{1}, {}});
    const Mat reps = constant_rows(2, 3);
    CHECK(nd_ka_loss(reps, reps, b, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("identical modalities collapse nd_ka to a single direction") {
    auto eng = rng::make(101);
    const ContrastBatch b = testgen::random_batch(eng, 5, 3);
    const Mat reps = testgen::random_reps(eng, b.num_slots(), 4);
    const double tau = 0.3;
    const double loss = nd_ka_loss(reps, reps, b, tau);

    // One direction computed alone.
    double total = 0.0;
    int actives = 0;
    for (int q = 0; q < b.num_queries(); ++q) {
        if (!b.active(q)) continue;
        ++actives;
        std::vector<int> pos_ext = b.positives(q);
        pos_ext.push_back(q);
        double inner = 0.0;
        for (const int p : pos_ext) {
            double den = 0.0;
            for (const int j : b.candidates_ext(q)) {
                den += std::exp(oracle::naive_cosine(reps, q, j) / tau);
            }
            inner += -std::log(std::exp(oracle::naive_cosine(reps, q, p) / tau) / den);
        }
        total += inner / static_cast<double>(pos_ext.size());
    }
    CHECK(loss == doctest::Approx(total / actives).epsilon(1e-9));
}

TEST_CASE("nd_ka rejects mismatched modality dimensions") {
    const ContrastBatch b = batch_of(2, {{1}, {}});
    CHECK_THROWS_WITH_AS(nd_ka_loss(Mat::Ones(2, 3), Mat::Ones(2, 4), b, 0.5),
                         doctest::Contains("dimension mismatch"), std::invalid_argument);
}

TEST_CASE("neighborhood distribution examples") {
    SUBCASE("two candidates with equal similarities") {
        const ContrastBatch b = batch_of(3, {{1}, {}, {}});
        const auto dist = neighborhood_distribution(constant_rows(3, 2), b, 0, 1.0);
        REQUIRE(dist.probabilities.size() == 2);
        CHECK(dist.probabilities(0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(dist.probabilities(1) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("similarities (1, 0) at tau 1") {
        const ContrastBatch b = batch_of(3, {{1}, {}, {}});
        Mat reps(3, 2);
        reps.row(0) << 1, 0;  // query
        reps.row(1) << 1, 0;  // sim 1
        reps.row(2) << 0, 1;  // sim 0
        const auto dist = neighborhood_distribution(reps, b, 0, 1.0);
        const double e = std::exp(1.0);
        CHECK(dist.probabilities(0) == doctest::Approx(e / (e + 1.0)).epsilon(1e-9));
        CHECK(dist.probabilities(1) == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-9));
        CHECK(dist.probabilities(0) == doctest::Approx(0.731059).epsilon(1e-5));
    }
    SUBCASE("probabilities sum to one") {
        auto eng = rng::make(5);
        const ContrastBatch b = testgen::random_batch(eng);
        const Mat reps = testgen::random_reps(eng, b.num_slots(), 5);
        for (int q = 0; q < b.num_queries(); ++q) {
            const auto dist = neighborhood_distribution(reps, b, q, 0.05);
            CHECK(std::abs(dist.probabilities.sum() - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("kl divergence examples") {
    SimilarityDistribution p, q;
    p.candidates = q.candidates = {10, 11};
    p.probabilities = Eigen::Vector2d(0.5, 0.5);
    q.probabilities = Eigen::Vector2d(0.5, 0.5);
    CHECK(kl_divergence(p, q) == 0.0);

    p.probabilities = Eigen::Vector2d(1.0, 0.0);  // point mass vs uniform
    CHECK(kl_divergence(p, q) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    p.probabilities = Eigen::Vector2d(0.7, 0.3);
    const double direct = 0.7 * std::log(1.4) + 0.3 * std::log(0.6);
    CHECK(kl_divergence(p, q) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(kl_divergence(p, q) == doctest::Approx(0.082282).epsilon(1e-4));

    SimilarityDistribution r = q;
    r.candidates = {10, 12};
    CHECK_THROWS_WITH_AS(kl_divergence(p, r), doctest::Contains("mismatch"),
                         std::invalid_argument);
}

TEST_CASE("nbh_ka identities and symmetry") {
    auto eng = rng::make(11);
    const ContrastBatch b = testgen::random_batch(eng);
    const Mat text = testgen::random_reps(eng, b.num_slots(), 4);
    const Mat gnn = testgen::random_reps(eng, b.num_slots(), 4);
    CHECK(nbh_ka_loss(text, text, b, 0.05) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(nbh_ka_loss(text, gnn, b, 0.05) ==
          doctest::Approx(nbh_ka_loss(gnn, text, b, 0.05)).epsilon(1e-12));
}

TEST_CASE("losses match the naive double-loop oracle on random batches") {
    auto eng = rng::make(202);
    for (int trial = 0; trial < 40; ++trial) {
        const ContrastBatch b = testgen::random_batch(eng, 8, 4);
        const int dim = 2 + static_cast<int>(rng::uniform_index(eng, 7));  // 2..8
        const Mat text = testgen::random_reps(eng, b.num_slots(), dim);
        const Mat gnn = testgen::random_reps(eng, b.num_slots(), dim);
        const double tau = std::vector<double>{0.05, 0.5, 1.0}[trial % 3];

        CHECK(std::abs(gc_cl_loss(text, b, tau) - oracle::naive_gc_cl(text, b, tau)) < 1e-9);
        CHECK(std::abs(nd_ka_loss(text, gnn, b, tau) - oracle::naive_nd_ka(text, gnn, b, tau)) <
              1e-9);
        CHECK(std::abs(nbh_ka_loss(text, gnn, b, tau) - oracle::naive_nbh_ka(text, gnn, b, tau)) <
              1e-9);
    }
}

TEST_CASE("total loss toggles and recomposition") {
    auto eng = rng::make(303);
    const ContrastBatch b = testgen::random_batch(eng);
    const Mat text = testgen::random_reps(eng, b.num_slots(), 5);
    const Mat gnn = testgen::random_reps(eng, b.num_slots(), 5);
    LossConfig cfg;
    cfg.temperature = 0.5;

    SUBCASE("only the text contrastive term") {
        cfg.use_gc_cl_gnn = cfg.use_nd_ka = cfg.use_nbh_ka = false;
        const LossBreakdown lb = total_loss(text, gnn, b, cfg);
        CHECK(lb.total == doctest::Approx(gc_cl_loss(text, b, cfg.temperature)).epsilon(1e-12));
        CHECK(lb.gc_cl_gnn == 0.0);
        CHECK(lb.nd_ka == 0.0);
        CHECK(lb.nbh_ka == 0.0);
    }
    SUBCASE("identical modalities zero the distribution alignment term") {
        const LossBreakdown lb = total_loss(text, text, b, cfg);
        CHECK(lb.nbh_ka == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(lb.total ==
              doctest::Approx(lb.gc_cl_text + lb.gc_cl_gnn + lb.nd_ka).epsilon(1e-12));
    }
    SUBCASE("total equals the sum of independently computed terms") {
        const LossBreakdown lb = total_loss(text, gnn, b, cfg);
        const double want = gc_cl_loss(text, b, cfg.temperature) +
                            gc_cl_loss(gnn, b, cfg.temperature) +
                            nd_ka_loss(text, gnn, b, cfg.temperature) +
                            nbh_ka_loss(text, gnn, b, cfg.temperature);
        CHECK(std::abs(lb.total - want) < 1e-9);
    }
    SUBCASE("all terms disabled is an error") {
        cfg.use_gc_cl_text = cfg.use_gc_cl_gnn = cfg.use_nd_ka = cfg.use_nbh_ka = false;
        CHECK_THROWS_WITH_AS(total_loss(text, gnn, b, cfg), doctest::Contains("all terms disabled"),
                             std::invalid_argument);
    }
}

TEST_CASE("per-query terms are non-negative") {
    auto eng = rng::make(404);
    for (int trial = 0; trial < 20; ++trial) {
        const ContrastBatch b = testgen::random_batch(eng);
        const Mat text = testgen::random_reps(eng, b.num_slots(), 4);
        const Mat gnn = testgen::random_reps(eng, b.num_slots(), 4);
        CHECK(gc_cl_loss(text, b, 0.05) >= 0.0);
        CHECK(nd_ka_loss(text, gnn, b, 0.05) >= 0.0);
        CHECK(nbh_ka_loss(text, gnn, b, 0.05) >= -1e-15);
    }
}

TEST_CASE("uniform-logit value is exactly the log candidate count") {
    auto eng = rng::make(505);
    const ContrastBatch b = testgen::random_batch(eng);
    const Mat reps = constant_rows(b.num_slots(), 6, 2.5);
    double want = 0.0;
    int actives = 0;
    for (int q = 0; q < b.num_queries(); ++q) {
        if (!b.active(q)) continue;
        ++actives;
        want += std::log(static_cast<double>(b.candidates(q).size()));
    }
    want /= actives;
    CHECK(std::abs(gc_cl_loss(reps, b, 0.05) - want) < 1e-9);
}

TEST_CASE("scaling any single vector by a positive scalar leaves losses unchanged") {
    auto eng = rng::make(606);
    const ContrastBatch b = testgen::random_batch(eng);
    const Mat text = testgen::random_reps(eng, b.num_slots(), 4);
    const Mat gnn = testgen::random_reps(eng, b.num_slots(), 4);
    LossConfig cfg;
    const LossBreakdown base = total_loss(text, gnn, b, cfg);
    for (const double scale : {3.7, 0.25}) {
        for (int row = 0; row < b.num_slots(); ++row) {
            Mat text2 = text;
            text2.row(row) *= scale;
            const LossBreakdown lb = total_loss(text2, gnn, b, cfg);
            CHECK(std::abs(lb.total - base.total) < 1e-7);
            CHECK(std::abs(lb.gc_cl_text - base.gc_cl_text) < 1e-7);
            CHECK(std::abs(lb.nd_ka - base.nd_ka) < 1e-7);
            CHECK(std::abs(lb.nbh_ka - base.nbh_ka) < 1e-7);
        }
    }
}

TEST_CASE("loss values do not depend on batch enumeration order") {
    // queries [0,1,2,3] vs reordered [0,3,1,2] with identical sets
    const std::vector<std::vector<NodeId>> nbrs{{4, 2}, {}, {0}, {}};
    const ContrastBatch b1 = ContrastBatch::assemble({0, 1, 2, 3}, nbrs);
    const ContrastBatch b2 =
        ContrastBatch::assemble({0, 3, 1, 2}, {{4, 2}, {}, {}, {0}});

    auto eng = rng::make(707);
    Mat reps_by_id = testgen::random_reps(eng, 5, 4);
    auto reps_for = [&](const ContrastBatch& b) {
        Mat m(b.num_slots(), 4);
        for (int s = 0; s < b.num_slots(); ++s) {
            m.row(s) = reps_by_id.row(b.ids()[static_cast<std::size_t>(s)]);
        }
        return m;
    };
    const Mat r1 = reps_for(b1);
    const Mat r2 = reps_for(b2);
    CHECK(std::abs(gc_cl_loss(r1, b1, 0.05) - gc_cl_loss(r2, b2, 0.05)) < 1e-9);
    CHECK(std::abs(nd_ka_loss(r1, r1, b1, 0.05) - nd_ka_loss(r2, r2, b2, 0.05)) < 1e-9);
    CHECK(std::abs(nbh_ka_loss(r1, r1 * 0.5, b1, 0.05) - nbh_ka_loss(r2, r2 * 0.5, b2, 0.05)) <
          1e-9);
}

TEST_CASE("a sampled neighbor that is also a batch member counts once, as a positive") {
    // query 0 samples node 1, which is also in the batch
    const ContrastBatch b = batch_of(3, {{1}, {}, {}});
    CHECK(b.num_slots() == 3);  // no extra slot created
    CHECK(b.candidates(0) == std::vector<int>{1, 2});
    CHECK(b.positives(0) == std::vector<int>{1});
}

TEST_CASE("perfect separation drives the loss to zero monotonically") {
    const ContrastBatch b = batch_of(3, {{3}, {}, {}});
    const double tau = 0.05;
    std::vector<double> losses;
    for (const auto& [pos, neg] : std::vector<std::pair<double, double>>{
             {0.9, -0.5}, {0.95, -0.7}, {1.0, -1.0}}) {
        const Mat reps = rows_with_sims_to_first({neg, neg, pos});
        losses.push_back(gc_cl_loss(reps, b, tau));
    }
    // non-increasing along the schedule (the tail saturates to exactly 0)
    CHECK(losses[1] <= losses[0]);
    CHECK(losses[2] <= losses[1]);
    CHECK(losses[0] > losses[2]);
    CHECK(losses[2] < 1e-12);
}

TEST_CASE("total loss gradients w.r.t. both representation matrices pass finite differences") {
    auto eng = rng::make(808);
    const ContrastBatch b = testgen::random_batch(eng, 5, 3);
    Mat text = testgen::random_reps(eng, b.num_slots(), 4);
    Mat gnn = testgen::random_reps(eng, b.num_slots(), 4);
    LossConfig cfg;
    cfg.temperature = 0.5;

    const auto eval = [&]() {
        ad::Tape t;
        return t.value(total_loss_on_tape(t, t.leaf(text, true), t.leaf(gnn, true), b, cfg).total)(
            0, 0);
    };
    ad::Tape t;
    ad::Var vt = t.leaf(text, true);
    ad::Var vg = t.leaf(gnn, true);
    t.backward(total_loss_on_tape(t, vt, vg, b, cfg).total);
    CHECK(gradcheck::max_grad_error(text, t.grad(vt), 1e-5, eval) < 1e-4);
    CHECK(gradcheck::max_grad_error(gnn, t.grad(vg), 1e-5, eval) < 1e-4);
}
