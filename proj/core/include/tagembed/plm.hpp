#pragma once
// Desk-scale transformer text encoder: token + learned positional
// embeddings, multi-head self-attention with padding mask, GELU
// feed-forward, post-norm residuals. The encoder output for a document is
// the final-layer hidden state at the [CLS] position.

#include <cstdint>
#include <optional>

#include "tagembed/autodiff.hpp"
#include "tagembed/params.hpp"
#include "tagembed/rng.hpp"
#include "tagembed/vocab.hpp"

namespace tagembed {

struct PlmConfig {
    int vocab_size = 0;  // set from the built Vocab
    int hidden_dim = 64;
    int num_layers = 2;
    int num_heads = 4;
    int max_sequence_length = 32;
    double dropout_rate = 0.1;

    void validate() const;
    int head_dim() const { return hidden_dim / num_heads; }
    int ffn_dim() const { return 4 * hidden_dim; }
};

// Dropout source for one forward pass; absent means dropout disabled.
struct DropoutState {
    double rate = 0.0;
    rng::Engine* eng = nullptr;

    bool active() const { return eng != nullptr && rate > 0.0; }
    ad::Mat mask(Eigen::Index rows, Eigen::Index cols) const;
};

ParamStore init_plm_params(const PlmConfig& config, std::uint64_t seed);

// Batch forward on the tape; sequences must share a padded length.
// Returns the |batch| x hidden_dim matrix of [CLS] representations.
ad::Var plm_encode(ad::Tape& tape, const BoundParams& params, const PlmConfig& config,
                   const std::vector<TokenSequence>& batch,
                   const DropoutState& dropout = {});

// Inference-only convenience (no gradients, no dropout).
ad::Mat plm_encode_values(const ParamStore& params, const PlmConfig& config,
                          const std::vector<TokenSequence>& batch);

}  // namespace tagembed
