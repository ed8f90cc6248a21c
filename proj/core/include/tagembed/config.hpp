#pragma once
// Plain hierarchical key-value run configuration with sections
// data / plm / gnn / loss / train / eval. Unknown keys are errors.

#include <string>

#include "tagembed/contrast.hpp"
#include "tagembed/gnn.hpp"
#include "tagembed/plm.hpp"
#include "tagembed/probes.hpp"
#include "tagembed/synthetic.hpp"
#include "tagembed/trainer.hpp"

namespace tagembed {

struct DataConfig {
    std::string nodes;
    std::string edges;
    int min_frequency = 1;
    SyntheticConfig synthetic;
};

struct EvalConfig {
    std::string probe = "mlp";
    int hidden_dim = 256;
    double dropout = 0.5;
    double learning_rate = 0.0;  // 0 = probe-type default (1e-4 mlp, 1e-3 graphsage)
    int epochs = 0;              // 0 = probe-type default (300 mlp, 200 graphsage)
    int batch_size = -1;
    int fanout_l1 = 5;
    int fanout_l2 = 10;
    bool neighbor_sampling = false;
    int repeats = 10;
    int k = 8;
    int negatives_per_query = 1000;
    std::string cluster_pool = "test";  // or "all"

    ProbeConfig probe_config() const;
};

struct RunConfig {
    DataConfig data;
    PlmConfig plm;
    GnnConfig gnn;
    LossConfig loss;
    TrainConfig train;
    EvalConfig eval;
};

RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& config);
void save_run_config(const std::string& path, const RunConfig& config);

}  // namespace tagembed
