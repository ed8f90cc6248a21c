#include "tagembed/probes.hpp"

#include <stdexcept>

#include "tagembed/optim.hpp"
#include "tagembed/rng.hpp"

namespace tagembed {

namespace {
constexpr std::uint64_t kStreamProbeInit = 401;
constexpr std::uint64_t kStreamProbeEpoch = 402;

ad::Mat xavier_init(Eigen::Index rows, Eigen::Index cols, rng::Engine& eng) {
    const double std = std::sqrt(2.0 / static_cast<double>(rows + cols));
    ad::Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = std * rng::normal(eng);
    }
    return m;
}

GnnConfig sage_layers_config(const ProbeConfig& cfg) {
    GnnConfig g;
    g.num_layers = 2;
    g.hidden_dim = cfg.hidden_dim;
    g.activation = GnnActivation::relu;
    g.dropout_rate = cfg.dropout;
    return g;
}

// Forward pass to logits for the requested rows.
ad::Var probe_logits(ad::Tape& tape, const BoundParams& bound, const ProbeModel& model,
                     const Eigen::MatrixXd& features, const std::vector<NodeId>& node_ids,
                     const TagGraph* graph, const DropoutState& dropout) {
    std::vector<int> rows(node_ids.begin(), node_ids.end());
    if (model.config.type == ProbeType::mlp) {
        ad::Mat input(static_cast<Eigen::Index>(rows.size()), features.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) input.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
        ad::Var x = tape.leaf(std::move(input), false);
        ad::Var h = tape.relu(tape.add_rowvec(tape.matmul(x, bound.var("probe.w1")),
                                              bound.var("probe.b1")));
        if (dropout.active()) {
            h = tape.hadamard_const(h, dropout.mask(tape.value(h).rows(), tape.value(h).cols()));
        }
        return tape.add_rowvec(tape.matmul(h, bound.var("probe.w2")), bound.var("probe.b2"));
    }
    if (graph == nullptr) throw std::invalid_argument("graphsage probe requires the graph");
    ad::Var x = tape.leaf(features, false);
    ad::Var h = gnn_encode(tape, bound, sage_layers_config(model.config), x,
                           build_mean_adjacency(*graph), node_ids, dropout);
    return tape.add_rowvec(tape.matmul(h, bound.var("probe.head_w")), bound.var("probe.head_b"));
}

}  // namespace

void ProbeConfig::validate() const {
    if (hidden_dim < 1) throw std::invalid_argument("probe: hidden_dim must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("probe: dropout in [0,1)");
    if (learning_rate <= 0.0) throw std::invalid_argument("probe: learning_rate must be positive");
    if (epochs < 0) throw std::invalid_argument("probe: epochs must be >= 0");
    if (batch_size == 0 || batch_size < -1) {
        throw std::invalid_argument("probe: batch_size must be -1 or positive");
    }
}

ProbeConfig ProbeConfig::mlp_defaults() { return {}; }

ProbeConfig ProbeConfig::graphsage_defaults() {
    ProbeConfig cfg;
    cfg.type = ProbeType::graphsage;
    cfg.learning_rate = 1e-3;
    cfg.epochs = 200;
    return cfg;
}

ProbeModel train_probe(const ProbeConfig& config, const Eigen::MatrixXd& features,
                       const std::vector<NodeId>& train_ids, const std::vector<int>& targets,
                       int num_classes, const TagGraph* graph, std::uint64_t seed) {
    config.validate();
    if (train_ids.empty()) throw std::invalid_argument("probe: no training nodes");
    if (train_ids.size() != targets.size()) {
        throw std::invalid_argument("probe: one target per training node required");
    }
    if (num_classes < 2) throw std::invalid_argument("probe: need at least two classes");

    ProbeModel model;
    model.config = config;
    model.num_classes = num_classes;

    auto init_rng = rng::make(rng::derive(seed, kStreamProbeInit));
    const auto d = features.cols();
    if (config.type == ProbeType::mlp) {
        model.params.add("probe.w1", xavier_init(d, config.hidden_dim, init_rng));
        model.params.add("probe.b1", ad::Mat::Zero(1, config.hidden_dim));
        model.params.add("probe.w2", xavier_init(config.hidden_dim, num_classes, init_rng));
        model.params.add("probe.b2", ad::Mat::Zero(1, num_classes));
    } else {
        ParamStore sage = init_gnn_params(sage_layers_config(config), static_cast<int>(d),
                                          rng::derive(seed, kStreamProbeInit, 1));
        for (auto& t : sage.tensors()) model.params.add(t.name, std::move(t.value));
        model.params.add("probe.head_w", xavier_init(config.hidden_dim, num_classes, init_rng));
        model.params.add("probe.head_b", ad::Mat::Zero(1, num_classes));
    }

    AdamW optimizer(AdamWConfig{config.learning_rate, 0.9, 0.999, 1e-8, 0.0});
    for (const auto& t : model.params.tensors()) {
        optimizer.register_tensor(t.name, t.value.rows(), t.value.cols());
    }

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto epoch_rng = rng::make(rng::derive(seed, kStreamProbeEpoch,
                                               static_cast<std::uint64_t>(epoch)));
        std::vector<std::size_t> order(train_ids.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        const std::size_t bs = config.batch_size == -1 ? train_ids.size()
                                                       : static_cast<std::size_t>(config.batch_size);
        if (config.batch_size != -1) rng::shuffle(order, epoch_rng);

        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t end = std::min(order.size(), start + bs);
            std::vector<NodeId> ids;
            std::vector<int> ys;
            for (std::size_t i = start; i < end; ++i) {
                ids.push_back(train_ids[order[i]]);
                ys.push_back(targets[order[i]]);
            }
            ad::Tape tape;
            BoundParams bound(tape, model.params, /*trainable=*/true);
            DropoutState drop{config.dropout, &epoch_rng};
            ad::Var logits = probe_logits(tape, bound, model, features, ids, graph,
                                          config.dropout > 0.0 ? drop : DropoutState{});
            ad::Var loss = tape.softmax_xent_rows(logits, ys);
            tape.backward(loss);
            std::unordered_map<std::string, const ad::Mat*> grads;
            for (const auto& t : model.params.tensors()) grads.emplace(t.name, &bound.grad(t.name));
            optimizer.step(model.params, grads);
        }
    }
    return model;
}

std::vector<int> probe_predict(const ProbeModel& model, const Eigen::MatrixXd& features,
                               const std::vector<NodeId>& node_ids, const TagGraph* graph) {
    ad::Tape tape;
    BoundParams bound(tape, model.params, /*trainable=*/false);
    const ad::Mat logits =
        tape.value(probe_logits(tape, bound, model, features, node_ids, graph, DropoutState{}));
    std::vector<int> pred(node_ids.size());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index best;
        logits.row(r).maxCoeff(&best);
        pred[static_cast<std::size_t>(r)] = static_cast<int>(best);
    }
    return pred;
}

double probe_accuracy(const ProbeModel& model, const Eigen::MatrixXd& features,
                      const std::vector<NodeId>& node_ids, const std::vector<int>& targets,
                      const TagGraph* graph) {
    if (node_ids.size() != targets.size() || node_ids.empty()) {
        throw std::invalid_argument("probe_accuracy: ids/targets mismatch");
    }
    const auto pred = probe_predict(model, features, node_ids, graph);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == targets[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace tagembed
