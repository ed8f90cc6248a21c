#pragma once
// Mean-aggregator message-passing encoder over frozen initial node
// features: h_i^l = act(h_i^{l-1} W_self + mean_{j in N(i)} h_j^{l-1} W_neigh).
// Isolated nodes aggregate a zero vector.

#include <cstdint>
#include <memory>

#include "tagembed/autodiff.hpp"
#include "tagembed/graph.hpp"
#include "tagembed/params.hpp"
#include "tagembed/plm.hpp"

namespace tagembed {

enum class GnnAggregator { mean };
enum class GnnActivation { tanh, relu, identity };

struct GnnConfig {
    int num_layers = 2;
    int hidden_dim = 64;
    GnnAggregator aggregator = GnnAggregator::mean;
    GnnActivation activation = GnnActivation::tanh;
    double dropout_rate = 0.1;

    void validate() const;
};

const char* activation_name(GnnActivation a);
GnnActivation activation_from_name(const std::string& name);

// Row-normalized adjacency (D^-1 A); zero rows for isolated nodes.
std::shared_ptr<const ad::SpMat> build_mean_adjacency(const TagGraph& graph);

ParamStore init_gnn_params(const GnnConfig& config, int input_dim, std::uint64_t seed);

// Full-graph forward; returns rows for node_ids (all nodes when empty).
ad::Var gnn_encode(ad::Tape& tape, const BoundParams& params, const GnnConfig& config,
                   ad::Var initial_features, std::shared_ptr<const ad::SpMat> mean_adj,
                   const std::vector<NodeId>& node_ids = {},
                   const DropoutState& dropout = {});

ad::Mat gnn_encode_values(const ParamStore& params, const GnnConfig& config,
                          const ad::Mat& initial_features, const TagGraph& graph,
                          const std::vector<NodeId>& node_ids = {});

}  // namespace tagembed
