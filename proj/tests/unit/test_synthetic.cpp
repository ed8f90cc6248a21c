#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "tagembed/synthetic.hpp"
#include "tagembed/vocab.hpp"

using namespace tagembed;

TEST_CASE("degenerate probabilities give two cliques and no cross edges") {
    SyntheticConfig cfg;
    cfg.num_classes = 2;
    cfg.nodes_per_class = 3;
    cfg.p_in = 1.0;
    cfg.p_out = 0.0;
    cfg.seed = 1;
    const TagGraph g = generate_synthetic_tag(cfg);
    CHECK(g.num_nodes() == 6);
    CHECK(g.num_edges() == 6);  // two 3-cliques
    for (const auto& [a, b] : g.edges()) {
        CHECK(g.label(a) == g.label(b));
    }
}

TEST_CASE("zero noise keeps every token in the class vocabulary") {
    SyntheticConfig cfg;
    cfg.num_classes = 3;
    cfg.nodes_per_class = 5;
    cfg.noise_rate = 0.0;
    cfg.seed = 2;
    const TagGraph g = generate_synthetic_tag(cfg);
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
        const std::string prefix = "c" + std::to_string(g.label(i)) + "w";
        for (const auto& w : split_lowercase_words(g.document(i).text)) {
            CHECK(w.rfind(prefix, 0) == 0);
        }
    }
}

TEST_CASE("intra-class edge count lands within 3 sigma of the binomial expectation") {
    SyntheticConfig cfg;
    cfg.num_classes = 4;
    cfg.nodes_per_class = 50;
    cfg.p_in = 0.2;
    cfg.p_out = 0.01;
    cfg.seed = 31;
    const TagGraph g = generate_synthetic_tag(cfg);

    std::int64_t intra = 0;
    for (const auto& [a, b] : g.edges()) {
        if (g.label(a) == g.label(b)) ++intra;
    }
    // 4 * C(50,2) intra pairs at p_in = 0.2
    const double trials = 4.0 * (50.0 * 49.0 / 2.0);
    const double mean = trials * cfg.p_in;          // 980
    const double sigma = std::sqrt(trials * cfg.p_in * (1.0 - cfg.p_in));  // 28
    CHECK(std::abs(static_cast<double>(intra) - mean) <= 3.0 * sigma);
}

TEST_CASE("labels and stratified splits are populated") {
    SyntheticConfig cfg;
    cfg.num_classes = 4;
    cfg.nodes_per_class = 50;
    cfg.seed = 7;
    const TagGraph g = generate_synthetic_tag(cfg);
    CHECK(g.has_labels());
    CHECK(g.has_splits());
    for (int cls = 0; cls < 4; ++cls) {
        int train = 0, valid = 0, test = 0;
        for (NodeId i = 0; i < g.num_nodes(); ++i) {
            if (g.label(i) != cls) continue;
            if (g.split(i) == Split::train) ++train;
            if (g.split(i) == Split::valid) ++valid;
            if (g.split(i) == Split::test) ++test;
        }
        CHECK(train == 30);
        CHECK(valid == 10);
        CHECK(test == 10);
    }
}

TEST_CASE("same seed reproduces the same graph") {
    SyntheticConfig cfg;
    cfg.seed = 55;
    const TagGraph a = generate_synthetic_tag(cfg);
    const TagGraph b = generate_synthetic_tag(cfg);
    CHECK(a.edges() == b.edges());
    for (NodeId i = 0; i < a.num_nodes(); ++i) {
        CHECK(a.document(i).text == b.document(i).text);
    }
}

TEST_CASE("parameter range violations are rejected") {
    SyntheticConfig cfg;
    cfg.p_in = 0.1;
    cfg.p_out = 0.2;  // p_out >= p_in
    CHECK_THROWS_AS(generate_synthetic_tag(cfg), std::invalid_argument);
    cfg.p_out = 0.01;
    cfg.noise_rate = 1.0;
    CHECK_THROWS_AS(generate_synthetic_tag(cfg), std::invalid_argument);
}
