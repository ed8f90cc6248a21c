#pragma once
// Downstream classification probes trained on frozen embeddings: an MLP
// over the embedding alone, and a GraphSAGE head that message-passes over
// the graph with the embeddings as input features.

#include <cstdint>

#include "tagembed/features.hpp"
#include "tagembed/gnn.hpp"
#include "tagembed/graph.hpp"

namespace tagembed {

enum class ProbeType { mlp, graphsage };

struct ProbeConfig {
    ProbeType type = ProbeType::mlp;
    int hidden_dim = 256;
    double dropout = 0.5;
    double learning_rate = 1e-4;
    int epochs = 300;
    int batch_size = -1;  // -1 = full batch
    int fanout_l1 = 5;    // used only when neighbor_sampling is on
    int fanout_l2 = 10;
    bool neighbor_sampling = false;  // desk scale defaults to full neighborhoods

    void validate() const;
    static ProbeConfig mlp_defaults();
    static ProbeConfig graphsage_defaults();
};

struct ProbeModel {
    ProbeConfig config;
    int num_classes = 0;
    ParamStore params;
};

// Trains on (features[train_ids], targets); targets are 0-based class
// indices aligned with train_ids. The graph is required for graphsage.
ProbeModel train_probe(const ProbeConfig& config, const Eigen::MatrixXd& features,
                       const std::vector<NodeId>& train_ids, const std::vector<int>& targets,
                       int num_classes, const TagGraph* graph, std::uint64_t seed);

// Predicted class index per requested node (dropout off).
std::vector<int> probe_predict(const ProbeModel& model, const Eigen::MatrixXd& features,
                               const std::vector<NodeId>& node_ids, const TagGraph* graph);

double probe_accuracy(const ProbeModel& model, const Eigen::MatrixXd& features,
                      const std::vector<NodeId>& node_ids, const std::vector<int>& targets,
                      const TagGraph* graph);

}  // namespace tagembed
