#include <doctest.h>

#include "tagembed/config.hpp"

#include "../support/tmp_files.hpp"

using namespace tagembed;

TEST_CASE("config serialization round-trips every field") {
    RunConfig cfg;
    cfg.data.nodes = "n.jsonl";
    cfg.data.edges = "e.txt";
    cfg.data.min_frequency = 2;
    cfg.data.synthetic.p_in = 0.33;
    cfg.plm.hidden_dim = 48;
    cfg.plm.num_heads = 3;
    cfg.gnn.activation = GnnActivation::relu;
    cfg.loss.temperature = 0.07;
    cfg.loss.use_nbh_ka = false;
    cfg.train.epochs = 9;
    cfg.train.seed = 123456789;
    cfg.eval.probe = "graphsage";
    cfg.eval.k = 16;

    testgen::TempDir dir;
    save_run_config(dir.file("run.ini"), cfg);
    const RunConfig back = load_run_config(dir.file("run.ini"));
    CHECK(back.data.nodes == cfg.data.nodes);
    CHECK(back.data.min_frequency == 2);
    CHECK(back.data.synthetic.p_in == doctest::Approx(0.33));
    CHECK(back.plm.hidden_dim == 48);
    CHECK(back.plm.num_heads == 3);
    CHECK(back.gnn.activation == GnnActivation::relu);
    CHECK(back.loss.temperature == doctest::Approx(0.07));
    CHECK(back.loss.use_nbh_ka == false);
    CHECK(back.train.epochs == 9);
    CHECK(back.train.seed == 123456789);
    CHECK(back.eval.probe == "graphsage");
    CHECK(back.eval.k == 16);
    CHECK(serialize_run_config(back) == serialize_run_config(cfg));
}

TEST_CASE("unknown keys and malformed lines are rejected with line numbers") {
    testgen::TempDir dir;
    testgen::write_file(dir.file("bad.ini"), "[train]\nepochs = 3\nnot_a_key = 1\n");
    CHECK_THROWS_WITH_AS(load_run_config(dir.file("bad.ini")), doctest::Contains(":3:"),
                         std::runtime_error);

    testgen::write_file(dir.file("bad2.ini"), "[loss]\ntemperature 0.05\n");
    CHECK_THROWS_WITH_AS(load_run_config(dir.file("bad2.ini")),
                         doctest::Contains("expected key = value"), std::runtime_error);

    testgen::write_file(dir.file("bad3.ini"), "[train]\nepochs = soon\n");
    CHECK_THROWS_WITH_AS(load_run_config(dir.file("bad3.ini")),
                         doctest::Contains("invalid integer"), std::runtime_error);
}

TEST_CASE("comments and blank lines are ignored") {
    testgen::TempDir dir;
    testgen::write_file(dir.file("ok.ini"),
                        "# top comment\n\n[train]\n; semicolon comment\nepochs = 4\n");
    CHECK(load_run_config(dir.file("ok.ini")).train.epochs == 4);
}

TEST_CASE("probe defaults depend on the probe type") {
    EvalConfig e;
    e.probe = "mlp";
    CHECK(e.probe_config().learning_rate == doctest::Approx(1e-4));
    CHECK(e.probe_config().epochs == 300);
    e.probe = "graphsage";
    CHECK(e.probe_config().learning_rate == doctest::Approx(1e-3));
    e.learning_rate = 5e-3;  // explicit override wins
    CHECK(e.probe_config().learning_rate == doctest::Approx(5e-3));
    e.probe = "nonsense";
    CHECK_THROWS_AS(e.probe_config(), std::invalid_argument);
}
