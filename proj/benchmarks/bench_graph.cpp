#include <benchmark/benchmark.h>

#include "tagembed/gnn.hpp"
#include "tagembed/khop.hpp"
#include "tagembed/synthetic.hpp"

using namespace tagembed;

namespace {

TagGraph bench_graph(int nodes_per_class) {
    SyntheticConfig cfg;
    cfg.num_classes = 4;
    cfg.nodes_per_class = nodes_per_class;
    cfg.p_in = 0.1;
    cfg.p_out = 0.005;
    cfg.seed = 3;
    return generate_synthetic_tag(cfg);
}

void khop_index_build(benchmark::State& state) {
    const TagGraph g = bench_graph(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_khop_index(g, 2));
    }
}

void gnn_full_forward(benchmark::State& state) {
    const TagGraph g = bench_graph(static_cast<int>(state.range(0)));
    GnnConfig cfg;
    cfg.num_layers = 2;
    cfg.hidden_dim = 64;
    const ParamStore params = init_gnn_params(cfg, 64, 9);
    auto eng = rng::make(4);
    ad::Mat e0(g.num_nodes(), 64);
    for (Eigen::Index r = 0; r < e0.rows(); ++r) {
        for (Eigen::Index c = 0; c < e0.cols(); ++c) e0(r, c) = rng::normal(eng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(gnn_encode_values(params, cfg, e0, g));
    }
}

}  // namespace

BENCHMARK(khop_index_build)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK(gnn_full_forward)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
