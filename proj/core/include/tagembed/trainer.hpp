#pragma once
// Joint pretraining of the text encoder and the GNN under the summed
// objective, plus batch construction and embedding export. Randomness is
// organized as counter-keyed streams (seed, epoch) and (seed, step), so a
// restored checkpoint continues bit-identically.

#include <functional>
#include <optional>
#include <string>

#include "tagembed/contrast.hpp"
#include "tagembed/features.hpp"
#include "tagembed/gnn.hpp"
#include "tagembed/khop.hpp"
#include "tagembed/optim.hpp"
#include "tagembed/plm.hpp"

namespace tagembed {

struct TrainConfig {
    double learning_rate = 5e-5;
    double weight_decay = 0.01;
    int epochs = 3;
    int batch_size = 32;
    std::uint64_t seed = 42;
    double grad_clip = 0.0;          // 0 disables clipping
    int checkpoint_every_epochs = 0;  // 0 = final checkpoint only
    bool deterministic = true;

    void validate() const;
};

struct TrainState {
    PlmConfig plm_config;
    GnnConfig gnn_config;
    LossConfig loss_config;
    TrainConfig train_config;
    Vocab vocab;
    ParamStore params;  // plm.* and gnn.* tensors
    AdamW optimizer;
    int epoch = 0;               // epochs completed
    std::int64_t global_step = 0;

    bool text_trainable() const {
        return loss_config.use_gc_cl_text || loss_config.use_nd_ka || loss_config.use_nbh_ka;
    }
    bool gnn_trainable() const {
        return loss_config.use_gc_cl_gnn || loss_config.use_nd_ka || loss_config.use_nbh_ka;
    }
    // Snapshot of the text-encoder side (plm.* tensors + vocab).
    TextEncoder text_encoder() const;
};

// Fresh state with seeded parameter init; plm.vocab_size is set from vocab.
TrainState make_train_state(PlmConfig plm, const GnnConfig& gnn, const LossConfig& loss,
                            const TrainConfig& train, Vocab vocab);

// Per query: N(i) sampled from the K-hop index, B(i) = other queries.
ContrastBatch build_batch(const TagGraph& graph, const NeighborhoodIndex& index,
                          const std::vector<NodeId>& node_ids, const LossConfig& config,
                          rng::Engine& eng);

struct StepLogRow {
    std::int64_t step = 0;
    double total = 0.0;
    double gc_cl_text = 0.0;
    double gc_cl_gnn = 0.0;
    double nd_ka = 0.0;
    double nbh_ka = 0.0;
};

struct PretrainHooks {
    std::function<void(const StepLogRow&)> on_step;
    std::function<void(const std::string&)> on_warning;
    std::function<void(const TrainState&)> on_epoch_end;
};

// Runs epochs [state.epoch, train_config.epochs). The initial features are
// frozen throughout; non-finite losses abort with a diagnostic that names
// the offending batch.
void pretrain(TrainState& state, const TagGraph& graph, const EmbeddingMatrix& initial_features,
              const PretrainHooks& hooks = {});

// Final text-encoder forward over all documents, dropout off; the GNN is
// not used at export time.
EmbeddingMatrix export_embeddings(const TrainState& state, const TagGraph& graph);

void write_train_log(const std::string& path, const std::vector<StepLogRow>& rows);

}  // namespace tagembed
