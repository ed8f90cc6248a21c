#pragma once
// Planted-partition synthetic TAG generator: homophilous graph structure
// with class-specific token vocabularies, used as a desk-scale benchmark.

#include <cstdint>

#include "tagembed/graph.hpp"

namespace tagembed {

struct SyntheticConfig {
    int num_classes = 4;
    int nodes_per_class = 50;
    double p_in = 0.2;    // intra-class edge probability
    double p_out = 0.01;  // inter-class edge probability
    int vocab_per_class = 30;
    int doc_length = 12;
    double noise_rate = 0.2;  // chance a token is replaced by a shared noise token
    std::uint64_t seed = 7;
    // Stratified split fractions; the remainder of each class goes to test.
    double train_fraction = 0.6;
    double valid_fraction = 0.2;
};

// Intra-class edges drawn with p_in, inter-class with p_out; node text is
// doc_length tokens from the class vocabulary with noise_rate replacement
// from a shared noise vocabulary; labels are class ids; splits stratified.
TagGraph generate_synthetic_tag(const SyntheticConfig& config);

}  // namespace tagembed
