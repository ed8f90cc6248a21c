#include <benchmark/benchmark.h>

#include "tagembed/losses.hpp"
#include "tagembed/rng.hpp"

using namespace tagembed;

namespace {

struct Fixture {
    ContrastBatch batch;
    ad::Mat text;
    ad::Mat gnn;
};

Fixture make_fixture(int batch_size, int dim) {
    auto eng = rng::make(1);
    std::vector<NodeId> queries;
    std::vector<std::vector<NodeId>> neighbors;
    for (int q = 0; q < batch_size; ++q) {
        queries.push_back(q);
        std::vector<NodeId> n;
        n.push_back((q + 1) % batch_size);
        n.push_back(batch_size + q);  // one out-of-batch neighbor each
        neighbors.push_back(n);
    }
    Fixture f{ContrastBatch::assemble(queries, neighbors), {}, {}};
    const int slots = f.batch.num_slots();
    f.text.resize(slots, dim);
    f.gnn.resize(slots, dim);
    for (Eigen::Index r = 0; r < slots; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            f.text(r, c) = rng::normal(eng);
            f.gnn(r, c) = rng::normal(eng);
        }
    }
    return f;
}

void total_loss_forward(benchmark::State& state) {
    const Fixture f = make_fixture(static_cast<int>(state.range(0)), 64);
    LossConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(total_loss(f.text, f.gnn, f.batch, cfg).total);
    }
}

void total_loss_backward(benchmark::State& state) {
    const Fixture f = make_fixture(static_cast<int>(state.range(0)), 64);
    LossConfig cfg;
    for (auto _ : state) {
        ad::Tape tape;
        ad::Var vt = tape.leaf(f.text, true);
        ad::Var vg = tape.leaf(f.gnn, true);
        const LossTerms terms = total_loss_on_tape(tape, vt, vg, f.batch, cfg);
        tape.backward(terms.total);
        benchmark::DoNotOptimize(tape.grad(vt));
    }
}

}  // namespace

BENCHMARK(total_loss_forward)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(total_loss_backward)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
