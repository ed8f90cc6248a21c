#include <doctest.h>

#include <cmath>

#include "tagembed/checkpoint.hpp"
#include "tagembed/synthetic.hpp"
#include "tagembed/trainer.hpp"

#include "../support/tmp_files.hpp"

using namespace tagembed;

namespace {

TagGraph train_graph(int nodes_per_class = 12, std::uint64_t seed = 5) {
    SyntheticConfig cfg;
    cfg.num_classes = 2;
    cfg.nodes_per_class = nodes_per_class;
    cfg.p_in = 0.3;
    cfg.p_out = 0.05;
    cfg.doc_length = 6;
    cfg.vocab_per_class = 10;
    cfg.seed = seed;
    return generate_synthetic_tag(cfg);
}

TrainState tiny_state(const TagGraph& g, const LossConfig& loss, int epochs = 1,
                      int batch_size = 8, std::uint64_t seed = 42) {
    PlmConfig plm;
    plm.hidden_dim = 8;
    plm.num_layers = 1;
    plm.num_heads = 2;
    plm.max_sequence_length = 12;
    plm.dropout_rate = 0.1;
    GnnConfig gnn;
    gnn.num_layers = 1;
    gnn.hidden_dim = 8;
    gnn.dropout_rate = 0.1;
    TrainConfig train;
    train.learning_rate = 1e-3;
    train.epochs = epochs;
    train.batch_size = batch_size;
    train.seed = seed;
    return make_train_state(plm, gnn, loss, train, build_vocab(g.documents(), 1));
}

std::vector<StepLogRow> run_pretrain(TrainState& state, const TagGraph& g,
                                     const EmbeddingMatrix& e0) {
    std::vector<StepLogRow> rows;
    PretrainHooks hooks;
    hooks.on_step = [&](const StepLogRow& r) { rows.push_back(r); };
    pretrain(state, g, e0, hooks);
    return rows;
}

}  // namespace

TEST_CASE("build_batch of two linked nodes collapses the union") {
    std::vector<Document> docs;
    for (int i = 0; i < 2; ++i) docs.push_back({i, "n", {}});
    const TagGraph g(std::move(docs), {{0, 1}});
    const auto index = build_khop_index(g, 1);
    LossConfig loss;
    loss.neighbor_sample_size = 1;
    auto eng = rng::make(1);
    const ContrastBatch b = build_batch(g, index, {0, 1}, loss, eng);
    CHECK(b.num_slots() == 2);
    CHECK(b.positives(0) == std::vector<int>{1});
    CHECK(b.candidates(0) == std::vector<int>{1});
    CHECK(b.candidates(1) == std::vector<int>{0});
}

TEST_CASE("build_batch is deterministic under a fixed seed") {
    const TagGraph g = train_graph(16);
    const auto index = build_khop_index(g, 1);
    LossConfig loss;
    std::vector<NodeId> ids;
    for (NodeId i = 0; i < 32 && i < g.num_nodes(); ++i) ids.push_back(i);
    auto e1 = rng::make(77);
    auto e2 = rng::make(77);
    const ContrastBatch a = build_batch(g, index, ids, loss, e1);
    const ContrastBatch b = build_batch(g, index, ids, loss, e2);
    CHECK(a.ids() == b.ids());
    for (int q = 0; q < a.num_queries(); ++q) CHECK(a.positives(q) == b.positives(q));
}

TEST_CASE("an all-isolated batch is skipped with a warning") {
    std::vector<Document> docs;
    for (int i = 0; i < 6; ++i) docs.push_back({i, "word " + std::to_string(i), {}});
    const TagGraph g(std::move(docs), {});  // no edges at all
    LossConfig loss;
    TrainState state = tiny_state(g, loss, 1, 3);
    const EmbeddingMatrix e0 = compute_initial_features(g, state.text_encoder());
    std::vector<std::string> warnings;
    std::vector<StepLogRow> rows;
    PretrainHooks hooks;
    hooks.on_step = [&](const StepLogRow& r) { rows.push_back(r); };
    hooks.on_warning = [&](const std::string& w) { warnings.push_back(w); };
    pretrain(state, g, e0, hooks);
    CHECK(rows.empty());
    CHECK(warnings.size() == 2);  // two chunks of three isolated nodes
    CHECK(warnings[0].find("no sampled positives") != std::string::npos);
}

TEST_CASE("step arithmetic: ceil(n / batch) steps per epoch") {
    const TagGraph g = train_graph(100, 6);  // 200 nodes
    LossConfig loss;
    TrainState state = tiny_state(g, loss, 1, 32);
    const EmbeddingMatrix e0 = compute_initial_features(g, state.text_encoder());
    const auto rows = run_pretrain(state, g, e0);
    CHECK(rows.size() == 7);  // ceil(200 / 32)
    CHECK(state.global_step == 7);
}

TEST_CASE("identical seeds give identical loss curves") {
    const TagGraph g = train_graph();
    LossConfig loss;
    TrainState s1 = tiny_state(g, loss, 2);
    TrainState s2 = tiny_state(g, loss, 2);
    const EmbeddingMatrix e0 = compute_initial_features(g, s1.text_encoder());
    const auto r1 = run_pretrain(s1, g, e0);
    const auto r2 = run_pretrain(s2, g, e0);
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].total == r2[i].total);
        CHECK(r1[i].nd_ka == r2[i].nd_ka);
    }
}

TEST_CASE("disabled terms log exactly zero") {
    const TagGraph g = train_graph();
    LossConfig loss;
    loss.use_nd_ka = false;
    loss.use_nbh_ka = false;
    TrainState state = tiny_state(g, loss);
    const EmbeddingMatrix e0 = compute_initial_features(g, state.text_encoder());
    const auto rows = run_pretrain(state, g, e0);
    REQUIRE(!rows.empty());
    for (const auto& r : rows) {
        CHECK(r.nd_ka == 0.0);
        CHECK(r.nbh_ka == 0.0);
        CHECK(r.gc_cl_text > 0.0);
        CHECK(std::abs(r.total - (r.gc_cl_text + r.gc_cl_gnn)) < 1e-12);
    }
}

TEST_CASE("single-parameter-set isolation under one-sided objectives") {
    const TagGraph g = train_graph();

    SUBCASE("only the GNN contrastive term leaves text parameters untouched") {
        LossConfig loss;
        loss.use_gc_cl_text = false;
        loss.use_nd_ka = false;
        loss.use_nbh_ka = false;
        TrainState state = tiny_state(g, loss);
        const EmbeddingMatrix e0 = compute_initial_features(g, state.text_encoder());
        const ad::Mat before = state.params.at("plm.tok_emb");
        const ad::Mat gnn_before = state.params.at("gnn.l0.w_self");
        run_pretrain(state, g, e0);
        CHECK((state.params.at("plm.tok_emb") - before).cwiseAbs().maxCoeff() == 0.0);
        CHECK((state.params.at("gnn.l0.w_self") - gnn_before).cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("only the text contrastive term leaves GNN parameters untouched") {
        LossConfig loss;
        loss.use_gc_cl_gnn = false;
        loss.use_nd_ka = false;
        loss.use_nbh_ka = false;
        TrainState state = tiny_state(g, loss);
        const EmbeddingMatrix e0 = compute_initial_features(g, state.text_encoder());
        const ad::Mat before = state.params.at("gnn.l0.w_self");
        run_pretrain(state, g, e0);
        CHECK((state.params.at("gnn.l0.w_self") - before).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("checkpoint mid-run continues the uninterrupted loss sequence exactly") {
    testgen::TempDir dir;
    const TagGraph g = train_graph();
    LossConfig loss;

    TrainState full = tiny_state(g, loss, 3);
    const EmbeddingMatrix e0 = compute_initial_features(g, full.text_encoder());
    const auto full_rows = run_pretrain(full, g, e0);

    TrainState half = tiny_state(g, loss, 2);
    const auto half_rows = run_pretrain(half, g, e0);
    save_checkpoint(dir.file("ckpt.bin"), half);

    TrainState resumed = load_checkpoint(dir.file("ckpt.bin"));
    resumed.train_config.epochs = 3;
    const auto tail_rows = run_pretrain(resumed, g, e0);

    REQUIRE(half_rows.size() + tail_rows.size() == full_rows.size());
    for (std::size_t i = 0; i < tail_rows.size(); ++i) {
        const auto& want = full_rows[half_rows.size() + i];
        CHECK(tail_rows[i].step == want.step);
        CHECK(tail_rows[i].total == want.total);  // bit-exact
    }
    // parameters of the resumed run equal the uninterrupted run's
    for (const auto& t : full.params.tensors()) {
        CHECK((resumed.params.at(t.name) - t.value).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("checkpoint save/load round trip is bit-exact") {
    testgen::TempDir dir;
    const TagGraph g = train_graph();
    LossConfig loss;
    TrainState state = tiny_state(g, loss, 1);
    const EmbeddingMatrix e0 = compute_initial_features(g, state.text_encoder());
    run_pretrain(state, g, e0);

    save_checkpoint(dir.file("a.bin"), state);
    const TrainState loaded = load_checkpoint(dir.file("a.bin"));
    save_checkpoint(dir.file("b.bin"), loaded);
    CHECK(testgen::read_file(dir.file("a.bin")) == testgen::read_file(dir.file("b.bin")));
    CHECK(loaded.global_step == state.global_step);
    CHECK(loaded.vocab.id_to_token == state.vocab.id_to_token);
    CHECK(loaded.optimizer.step_count() == state.optimizer.step_count());
}

TEST_CASE("export uses the frozen text encoder only and is deterministic") {
    const TagGraph g = train_graph();
    LossConfig loss;
    TrainState state = tiny_state(g, loss, 1);
    const EmbeddingMatrix e0 = compute_initial_features(g, state.text_encoder());

    // untrained export coincides with the initial features
    const EmbeddingMatrix untrained = export_embeddings(state, g);
    CHECK((untrained.values - e0.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK(untrained.role == EmbeddingRole::exported);

    run_pretrain(state, g, e0);
    const EmbeddingMatrix a = export_embeddings(state, g);
    const EmbeddingMatrix b = export_embeddings(state, g);
    CHECK(a.rows() == g.num_nodes());
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.values - untrained.values).cwiseAbs().maxCoeff() > 0.0);  // training moved it
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
    const TagGraph g = train_graph();
    LossConfig loss;
    TrainState state = tiny_state(g, loss, 1);
    const EmbeddingMatrix e0 = compute_initial_features(g, state.text_encoder());
    state.params.at("gnn.l0.w_self").setConstant(std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_WITH_AS(run_pretrain(state, g, e0), doctest::Contains("non-finite loss"),
                         std::runtime_error);
}

TEST_CASE("mean loss improves from the first epoch to the last") {
    SyntheticConfig scfg;
    scfg.num_classes = 4;
    scfg.nodes_per_class = 12;
    scfg.p_in = 0.2;
    scfg.p_out = 0.01;
    scfg.seed = 44;
    const TagGraph g = generate_synthetic_tag(scfg);
    LossConfig loss;
    TrainState state = tiny_state(g, loss, 30, 8, 13);
    const EmbeddingMatrix e0 = compute_initial_features(g, state.text_encoder());
    const auto rows = run_pretrain(state, g, e0);
    REQUIRE(!rows.empty());
    const auto steps_per_epoch = static_cast<std::size_t>((g.num_nodes() + 7) / 8);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < steps_per_epoch; ++i) {
        first += rows[i].total;
        last += rows[rows.size() - steps_per_epoch + i].total;
    }
    CHECK(last < first);
}

TEST_CASE("gradient clipping bounds the update without breaking determinism") {
    const TagGraph g = train_graph();
    LossConfig loss;
    TrainState clipped = tiny_state(g, loss, 1);
    clipped.train_config.grad_clip = 1e-3;  // aggressive clip
    TrainState free = tiny_state(g, loss, 1);
    const EmbeddingMatrix e0 = compute_initial_features(g, free.text_encoder());
    const ad::Mat start = free.params.at("plm.tok_emb");
    run_pretrain(clipped, g, e0);
    run_pretrain(free, g, e0);
    const double moved_clipped = (clipped.params.at("plm.tok_emb") - start).norm();
    const double moved_free = (free.params.at("plm.tok_emb") - start).norm();
    CHECK(moved_clipped > 0.0);
    CHECK(moved_clipped < moved_free);

    // a huge clip threshold is a no-op
    TrainState noop = tiny_state(g, loss, 1);
    noop.train_config.grad_clip = 1e9;
    run_pretrain(noop, g, e0);
    CHECK((noop.params.at("plm.tok_emb") - free.params.at("plm.tok_emb")).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("config validation") {
    TrainConfig cfg;
    cfg.batch_size = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.batch_size = 2;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
