#include "tagembed/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tagembed/losses.hpp"

namespace tagembed {

namespace {
// Stream tags for counter-keyed rng derivation.
constexpr std::uint64_t kStreamPlmInit = 101;
constexpr std::uint64_t kStreamGnnInit = 102;
constexpr std::uint64_t kStreamEpochPerm = 201;
constexpr std::uint64_t kStreamStep = 301;
}  // namespace

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be positive");
    if (weight_decay < 0.0) throw std::invalid_argument("train: weight_decay must be >= 0");
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (batch_size < 2) throw std::invalid_argument("train: batch_size must be >= 2");
    if (grad_clip < 0.0) throw std::invalid_argument("train: grad_clip must be >= 0");
}

TextEncoder TrainState::text_encoder() const {
    TextEncoder enc;
    enc.config = plm_config;
    enc.vocab = vocab;
    for (const auto& t : params.tensors()) {
        if (t.name.rfind("plm.", 0) == 0) enc.params.add(t.name, t.value);
    }
    return enc;
}

TrainState make_train_state(PlmConfig plm, const GnnConfig& gnn, const LossConfig& loss,
                            const TrainConfig& train, Vocab vocab) {
    train.validate();
    loss.validate();
    gnn.validate();
    plm.vocab_size = vocab.size();
    plm.validate();

    TrainState state;
    state.plm_config = plm;
    state.gnn_config = gnn;
    state.loss_config = loss;
    state.train_config = train;
    state.vocab = std::move(vocab);

    ParamStore plm_params = init_plm_params(plm, rng::derive(train.seed, kStreamPlmInit));
    ParamStore gnn_params =
        init_gnn_params(gnn, plm.hidden_dim, rng::derive(train.seed, kStreamGnnInit));
    for (auto& t : plm_params.tensors()) state.params.add(t.name, std::move(t.value));
    for (auto& t : gnn_params.tensors()) state.params.add(t.name, std::move(t.value));

    state.optimizer = AdamW(AdamWConfig{train.learning_rate, 0.9, 0.999, 1e-8, train.weight_decay});
    for (const auto& t : state.params.tensors()) {
        const bool is_plm = t.name.rfind("plm.", 0) == 0;
        if ((is_plm && state.text_trainable()) || (!is_plm && state.gnn_trainable())) {
            state.optimizer.register_tensor(t.name, t.value.rows(), t.value.cols());
        }
    }
    return state;
}

ContrastBatch build_batch(const TagGraph& graph, const NeighborhoodIndex& index,
                          const std::vector<NodeId>& node_ids, const LossConfig& config,
                          rng::Engine& eng) {
    std::vector<std::vector<NodeId>> sampled;
    sampled.reserve(node_ids.size());
    for (const NodeId id : node_ids) {
        if (id < 0 || id >= graph.num_nodes()) {
            throw std::out_of_range("build_batch: node id out of range");
        }
        sampled.push_back(sample_neighbors(index, id, config.neighbor_sample_size, eng));
    }
    return ContrastBatch::assemble(node_ids, sampled);
}

namespace {

std::vector<TokenSequence> tokenize_slots(const TagGraph& graph, const ContrastBatch& batch,
                                          const Vocab& vocab, int max_len) {
    std::vector<TokenSequence> seqs;
    seqs.reserve(batch.ids().size());
    for (const NodeId id : batch.ids()) {
        seqs.push_back(tokenize(graph.document(id), vocab, max_len));
    }
    pad_batch(seqs);
    return seqs;
}

std::string describe_batch(const ContrastBatch& batch) {
    std::ostringstream os;
    os << "batch ids:";
    for (const NodeId id : batch.ids()) os << ' ' << id;
    return os.str();
}

}  // namespace

void pretrain(TrainState& state, const TagGraph& graph, const EmbeddingMatrix& initial_features,
              const PretrainHooks& hooks) {
    state.train_config.validate();
    state.loss_config.validate();
    if (initial_features.rows() != graph.num_nodes()) {
        throw std::runtime_error("initial feature row count does not match graph node count");
    }
    initial_features.check_finite();

    const auto warn = [&](const std::string& msg) {
        if (hooks.on_warning) hooks.on_warning(msg);
    };

    const auto adj = build_mean_adjacency(graph);
    const NeighborhoodIndex index = build_khop_index(graph, state.loss_config.hop_count);
    const std::uint64_t seed = state.train_config.seed;

    for (; state.epoch < state.train_config.epochs; ++state.epoch) {
        auto perm_rng = rng::make(rng::derive(seed, kStreamEpochPerm,
                                              static_cast<std::uint64_t>(state.epoch)));
        std::vector<NodeId> order(static_cast<std::size_t>(graph.num_nodes()));
        for (NodeId i = 0; i < graph.num_nodes(); ++i) order[static_cast<std::size_t>(i)] = i;
        rng::shuffle(order, perm_rng);

        const int bs = state.train_config.batch_size;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(bs)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(bs));
            std::vector<NodeId> chunk(order.begin() + static_cast<std::ptrdiff_t>(start),
                                      order.begin() + static_cast<std::ptrdiff_t>(end));
            auto step_rng = rng::make(rng::derive(seed, kStreamStep,
                                                  static_cast<std::uint64_t>(state.global_step)));
            if (chunk.size() < 2) {
                warn("skipping undersized batch of " + std::to_string(chunk.size()) +
                     " node(s) at step " + std::to_string(state.global_step));
                ++state.global_step;
                continue;
            }
            ContrastBatch batch = build_batch(graph, index, chunk, state.loss_config, step_rng);
            if (batch.num_active() == 0) {
                warn("skipping batch with no sampled positives at step " +
                     std::to_string(state.global_step) + " (" + describe_batch(batch) + ")");
                ++state.global_step;
                continue;
            }

            ad::Tape tape;
            BoundParams bound(tape, state.params, /*trainable=*/true);

            DropoutState plm_drop{state.plm_config.dropout_rate, &step_rng};
            const auto seqs = tokenize_slots(graph, batch, state.vocab,
                                             state.plm_config.max_sequence_length);
            ad::Var text_reps = plm_encode(tape, bound, state.plm_config, seqs,
                                           state.plm_config.dropout_rate > 0.0 ? plm_drop
                                                                               : DropoutState{});

            ad::Var e0 = tape.leaf(initial_features.values, /*requires_grad=*/false);
            DropoutState gnn_drop{state.gnn_config.dropout_rate, &step_rng};
            ad::Var gnn_reps = gnn_encode(tape, bound, state.gnn_config, e0, adj, batch.ids(),
                                          state.gnn_config.dropout_rate > 0.0 ? gnn_drop
                                                                              : DropoutState{});

            const LossTerms terms =
                total_loss_on_tape(tape, text_reps, gnn_reps, batch, state.loss_config);
            const double total = tape.value(terms.total)(0, 0);
            if (!std::isfinite(total)) {
                throw std::runtime_error("non-finite loss at step " +
                                         std::to_string(state.global_step) + "; " +
                                         describe_batch(batch));
            }
            tape.backward(terms.total);

            std::unordered_map<std::string, const ad::Mat*> grads;
            for (const auto& entry : state.optimizer.moments()) {
                grads.emplace(entry.name, &bound.grad(entry.name));
            }
            std::unordered_map<std::string, ad::Mat> clipped;
            if (state.train_config.grad_clip > 0.0) {
                double sq = 0.0;
                for (const auto& [name, g] : grads) sq += g->squaredNorm();
                const double norm = std::sqrt(sq);
                if (norm > state.train_config.grad_clip) {
                    const double scale = state.train_config.grad_clip / norm;
                    for (auto& [name, g] : grads) {
                        clipped.emplace(name, *g * scale);
                        g = &clipped.at(name);
                    }
                }
            }
            state.optimizer.step(state.params, grads);

            StepLogRow row;
            row.step = state.global_step;
            row.total = total;
            if (terms.gc_cl_text) row.gc_cl_text = tape.value(*terms.gc_cl_text)(0, 0);
            if (terms.gc_cl_gnn) row.gc_cl_gnn = tape.value(*terms.gc_cl_gnn)(0, 0);
            if (terms.nd_ka) row.nd_ka = tape.value(*terms.nd_ka)(0, 0);
            if (terms.nbh_ka) row.nbh_ka = tape.value(*terms.nbh_ka)(0, 0);
            if (hooks.on_step) hooks.on_step(row);
            ++state.global_step;
        }
        if (hooks.on_epoch_end) hooks.on_epoch_end(state);
    }
}

EmbeddingMatrix export_embeddings(const TrainState& state, const TagGraph& graph) {
    const TextEncoder enc = state.text_encoder();
    EmbeddingMatrix out;
    out.role = EmbeddingRole::exported;
    out.values = quantize_to_float(enc.encode_documents(graph.documents()));
    out.check_finite();
    return out;
}

void write_train_log(const std::string& path, const std::vector<StepLogRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write training log: " + path);
    out << "step\ttotal\tgc_cl_text\tgc_cl_gnn\tnd_ka\tnbh_ka\n";
    out.precision(17);
    for (const auto& r : rows) {
        out << r.step << '\t' << r.total << '\t' << r.gc_cl_text << '\t' << r.gc_cl_gnn << '\t'
            << r.nd_ka << '\t' << r.nbh_ka << '\n';
    }
}

}  // namespace tagembed
