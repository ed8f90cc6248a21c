#include "tagembed/gnn.hpp"

#include <stdexcept>
#include <vector>

#include "tagembed/rng.hpp"

namespace tagembed {

namespace {
std::string lname(int layer, const char* tensor) {
    return "gnn.l" + std::to_string(layer) + "." + tensor;
}

ad::Mat xavier_init(Eigen::Index rows, Eigen::Index cols, rng::Engine& eng) {
    const double std = std::sqrt(2.0 / static_cast<double>(rows + cols));
    ad::Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = std * rng::normal(eng);
    }
    return m;
}
}  // namespace

void GnnConfig::validate() const {
    if (num_layers < 1) throw std::invalid_argument("gnn: num_layers must be >= 1");
    if (hidden_dim < 1) throw std::invalid_argument("gnn: hidden_dim must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw std::invalid_argument("gnn: dropout_rate must be in [0, 1)");
    }
}

const char* activation_name(GnnActivation a) {
    switch (a) {
        case GnnActivation::tanh: return "tanh";
        case GnnActivation::relu: return "relu";
        default: return "identity";
    }
}

GnnActivation activation_from_name(const std::string& name) {
    if (name == "tanh") return GnnActivation::tanh;
    if (name == "relu") return GnnActivation::relu;
    if (name == "identity") return GnnActivation::identity;
    throw std::invalid_argument("unknown gnn activation: " + name);
}

std::shared_ptr<const ad::SpMat> build_mean_adjacency(const TagGraph& graph) {
    const auto n = graph.num_nodes();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * graph.num_edges());
    for (NodeId i = 0; i < n; ++i) {
        const auto& nbrs = graph.neighbors(i);
        if (nbrs.empty()) continue;
        const double w = 1.0 / static_cast<double>(nbrs.size());
        for (const NodeId j : nbrs) triplets.emplace_back(i, j, w);
    }
    auto adj = std::make_shared<ad::SpMat>(n, n);
    adj->setFromTriplets(triplets.begin(), triplets.end());
    adj->makeCompressed();
    return adj;
}

ParamStore init_gnn_params(const GnnConfig& config, int input_dim, std::uint64_t seed) {
    config.validate();
    if (input_dim < 1) throw std::invalid_argument("gnn: input_dim must be positive");
    auto eng = rng::make(seed);
    ParamStore store;
    for (int l = 0; l < config.num_layers; ++l) {
        const int in = l == 0 ? input_dim : config.hidden_dim;
        store.add(lname(l, "w_self"), xavier_init(in, config.hidden_dim, eng));
        store.add(lname(l, "w_neigh"), xavier_init(in, config.hidden_dim, eng));
    }
    return store;
}

ad::Var gnn_encode(ad::Tape& tape, const BoundParams& params, const GnnConfig& config,
                   ad::Var initial_features, std::shared_ptr<const ad::SpMat> mean_adj,
                   const std::vector<NodeId>& node_ids, const DropoutState& dropout) {
    const auto n = tape.value(initial_features).rows();
    if (mean_adj->rows() != n || mean_adj->cols() != n) {
        throw std::invalid_argument("gnn_encode: adjacency/features size mismatch");
    }
    for (const NodeId id : node_ids) {
        if (id < 0 || id >= n) throw std::out_of_range("gnn_encode: node id out of range");
    }

    ad::Var h = initial_features;
    for (int l = 0; l < config.num_layers; ++l) {
        if (dropout.active()) {
            h = tape.hadamard_const(h, dropout.mask(n, tape.value(h).cols()));
        }
        ad::Var self_term = tape.matmul(h, params.var(lname(l, "w_self")));
        ad::Var neigh_term = tape.matmul(tape.spmm(mean_adj, h), params.var(lname(l, "w_neigh")));
        ad::Var pre = tape.add(self_term, neigh_term);
        switch (config.activation) {
            case GnnActivation::tanh: h = tape.tanh_act(pre); break;
            case GnnActivation::relu: h = tape.relu(pre); break;
            case GnnActivation::identity: h = pre; break;
        }
    }
    if (node_ids.empty()) return h;
    return tape.gather_rows(h, std::vector<int>(node_ids.begin(), node_ids.end()));
}

ad::Mat gnn_encode_values(const ParamStore& params, const GnnConfig& config,
                          const ad::Mat& initial_features, const TagGraph& graph,
                          const std::vector<NodeId>& node_ids) {
    ad::Tape tape;
    BoundParams bound(tape, params, /*trainable=*/false);
    ad::Var e0 = tape.leaf(initial_features, false);
    return tape.value(gnn_encode(tape, bound, config, e0, build_mean_adjacency(graph), node_ids));
}

}  // namespace tagembed
