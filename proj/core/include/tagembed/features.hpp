#pragma once
// Dense per-node representations and their on-disk cache. Cached matrices
// are stored as row-major float32, and the in-memory canonical values are
// the float32-rounded ones, so a fresh computation and a cache load are
// bit-identical.

#include <cstdint>
#include <string>

#include "tagembed/graph.hpp"
#include "tagembed/params.hpp"
#include "tagembed/plm.hpp"
#include "tagembed/vocab.hpp"

namespace tagembed {

enum class EmbeddingRole : std::uint32_t {
    initial_features = 0,
    text_reps = 1,
    gnn_reps = 2,
    exported = 3,
};

const char* role_name(EmbeddingRole role);

struct EmbeddingMatrix {
    ad::Mat values;
    EmbeddingRole role = EmbeddingRole::initial_features;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }
    // Throws if any entry is NaN/Inf.
    void check_finite() const;
};

// Text encoder bundle: config + weights + vocab. The hash stamps caches.
struct TextEncoder {
    PlmConfig config;
    ParamStore params;
    Vocab vocab;

    TokenSequence tokenize_doc(const Document& doc) const {
        return tokenize(doc, vocab, config.max_sequence_length);
    }
    // Dropout-free forward over documents, processed in fixed-size chunks.
    ad::Mat encode_documents(const std::vector<Document>& docs, int chunk = 64) const;
    std::uint64_t content_hash() const;
};

// E0: every document encoded under the frozen encoder, float32-rounded.
EmbeddingMatrix compute_initial_features(const TagGraph& graph, const TextEncoder& frozen);

void write_embedding_cache(const std::string& path, const EmbeddingMatrix& emb,
                           std::uint64_t config_hash);

struct EmbeddingCache {
    EmbeddingMatrix emb;
    std::uint64_t config_hash = 0;
};

EmbeddingCache read_embedding_cache(const std::string& path);

// Loads a cache and validates it against a graph (node-count check) and,
// when nonzero, an expected config hash.
EmbeddingMatrix load_features_for_graph(const std::string& path, const TagGraph& graph,
                                        std::uint64_t expected_hash);

// float32 round-trip applied entrywise.
ad::Mat quantize_to_float(const ad::Mat& m);

}  // namespace tagembed
