#include <doctest.h>

#include <cmath>

#include "tagembed/eval.hpp"
#include "tagembed/synthetic.hpp"

using namespace tagembed;

namespace {

TagGraph labeled_graph(int nodes_per_class = 25, std::uint64_t seed = 9) {
    SyntheticConfig cfg;
    cfg.num_classes = 4;
    cfg.nodes_per_class = nodes_per_class;
    cfg.p_in = 0.2;
    cfg.p_out = 0.02;
    cfg.seed = seed;
    return generate_synthetic_tag(cfg);
}

// One-hot rows by class: perfectly separable.
Eigen::MatrixXd onehot_embeddings(const TagGraph& g, double jitter = 0.0, std::uint64_t seed = 1) {
    auto eng = rng::make(seed);
    const auto classes = class_index_map(g);
    Eigen::MatrixXd emb = Eigen::MatrixXd::Zero(g.num_nodes(), static_cast<Eigen::Index>(classes.size()));
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
        emb(i, classes.at(g.label(i))) = 1.0;
        if (jitter > 0.0) {
            for (Eigen::Index c = 0; c < emb.cols(); ++c) emb(i, c) += jitter * rng::normal(eng);
        }
    }
    return emb;
}

Eigen::MatrixXd random_embeddings(const TagGraph& g, int dim, std::uint64_t seed) {
    auto eng = rng::make(seed);
    Eigen::MatrixXd emb(g.num_nodes(), dim);
    for (Eigen::Index r = 0; r < emb.rows(); ++r) {
        for (Eigen::Index c = 0; c < emb.cols(); ++c) emb(r, c) = rng::normal(eng);
    }
    return emb;
}

ProbeConfig quick_mlp(int epochs = 120) {
    ProbeConfig p = ProbeConfig::mlp_defaults();
    p.hidden_dim = 32;
    p.epochs = epochs;
    p.learning_rate = 5e-3;
    return p;
}

}  // namespace

TEST_CASE("separable embeddings give perfect few-shot accuracy every repeat") {
    const TagGraph g = labeled_graph();
    const EvalReport r = eval_fewshot_clf(onehot_embeddings(g), g, 2, quick_mlp(), 3, 11);
    for (const double acc : r.metrics.at("accuracy")) CHECK(acc == doctest::Approx(1.0));
}

TEST_CASE("random embeddings score near chance") {
    const TagGraph g = labeled_graph();
    const EvalReport r =
        eval_fewshot_clf(random_embeddings(g, 16, 3), g, 4, quick_mlp(), 4, 13);
    const double p = 0.25;  // four balanced classes
    const double n_test = static_cast<double>(g.split_members(Split::test).size());
    const double sigma = std::sqrt(p * (1 - p) / n_test);
    CHECK(std::abs(r.mean("accuracy") - p) <= 3.0 * sigma);
}

TEST_CASE("identical seeds reproduce the full report") {
    const TagGraph g = labeled_graph();
    const auto emb = onehot_embeddings(g, 0.1);
    const EvalReport a = eval_fewshot_clf(emb, g, 2, quick_mlp(40), 3, 17);
    const EvalReport b = eval_fewshot_clf(emb, g, 2, quick_mlp(40), 3, 17);
    CHECK(a.metrics.at("accuracy") == b.metrics.at("accuracy"));
}

TEST_CASE("full-data probe reaches at least few-shot accuracy on separable data") {
    const TagGraph g = labeled_graph();
    const auto emb = onehot_embeddings(g, 0.35, 5);
    const EvalReport full = eval_full_clf(emb, g, quick_mlp(), 3, 19);
    const EvalReport k16 = eval_fewshot_clf(emb, g, 15, quick_mlp(), 3, 19);
    CHECK(full.mean("accuracy") >= 0.8);
    // monotone-information check, logged but not gated
    WARN_LE(k16.mean("accuracy"), full.mean("accuracy") + 0.05);
}

TEST_CASE("zero-epoch probe stays near chance") {
    const TagGraph g = labeled_graph();
    const EvalReport r = eval_fewshot_clf(onehot_embeddings(g), g, 4, quick_mlp(0), 2, 23);
    CHECK(r.mean("accuracy") <= 0.55);
}

TEST_CASE("graphsage probe learns separable data") {
    const TagGraph g = labeled_graph();
    ProbeConfig p = ProbeConfig::graphsage_defaults();
    p.hidden_dim = 16;
    p.epochs = 80;
    p.learning_rate = 5e-3;
    const EvalReport r = eval_fewshot_clf(onehot_embeddings(g), g, 4, p, 2, 29);
    CHECK(r.mean("accuracy") >= 0.9);
}

TEST_CASE("clustering on cluster-pure embeddings is perfect across all metrics") {
    const TagGraph g = labeled_graph();
    const EvalReport r = eval_clustering(onehot_embeddings(g), g, 5, 31);
    CHECK(r.mean("acc") == doctest::Approx(1.0));
    CHECK(r.mean("nmi") == doctest::Approx(1.0));
    CHECK(r.mean("ari") == doctest::Approx(1.0));
    CHECK(r.stddev("acc") == doctest::Approx(0.0));
}

TEST_CASE("clustering pool flag switches between test split and all nodes") {
    const TagGraph g = labeled_graph();
    const auto emb = onehot_embeddings(g);
    const EvalReport test_pool = eval_clustering(emb, g, 2, 37, true);
    const EvalReport all_pool = eval_clustering(emb, g, 2, 37, false);
    CHECK(test_pool.mean("acc") == doctest::Approx(1.0));
    CHECK(all_pool.mean("acc") == doctest::Approx(1.0));
}

TEST_CASE("report statistics are recomputable from the per-repeat values") {
    EvalReport r;
    r.task = "demo";
    r.metrics["m"] = {0.5, 0.7, 0.9};
    CHECK(r.mean("m") == doctest::Approx(0.7));
    CHECK(r.stddev("m") == doctest::Approx(std::sqrt((0.04 + 0.0 + 0.04) / 3.0)));
}

TEST_CASE("link eval report wraps the mrr") {
    Eigen::MatrixXd emb(3, 2);
    emb.row(0) << 1, 0;
    emb.row(1) << 1, 0;
    emb.row(2) << -1, 0;
    LinkEvalSet set;
    set.negatives_per_query = 1;
    LinkQuery q;
    q.source = 0;
    q.positive = 1;
    q.negatives = {2};
    set.queries.push_back(q);
    const EvalReport r = eval_link_mrr(emb, set);
    CHECK(r.mean("mrr") == doctest::Approx(1.0));
}

TEST_CASE("embedding/graph row mismatch is rejected") {
    const TagGraph g = labeled_graph();
    Eigen::MatrixXd emb = Eigen::MatrixXd::Zero(g.num_nodes() - 1, 4);
    CHECK_THROWS_AS(eval_clustering(emb, g, 2, 1), std::invalid_argument);
}
