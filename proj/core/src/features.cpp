#include "tagembed/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "tagembed/hash.hpp"

namespace tagembed {

namespace {
constexpr char kMagic[8] = {'T', 'A', 'G', 'E', 'M', 'B', '0', '1'};
}

const char* role_name(EmbeddingRole role) {
    switch (role) {
        case EmbeddingRole::initial_features: return "initial_features";
        case EmbeddingRole::text_reps: return "text_reps";
        case EmbeddingRole::gnn_reps: return "gnn_reps";
        default: return "exported";
    }
}

void EmbeddingMatrix::check_finite() const {
    if (!values.allFinite()) {
        throw std::runtime_error(std::string("non-finite entries in ") + role_name(role) +
                                 " embedding matrix");
    }
}

ad::Mat TextEncoder::encode_documents(const std::vector<Document>& docs, int chunk) const {
    if (chunk < 1) throw std::invalid_argument("encode_documents: chunk must be positive");
    ad::Mat out(static_cast<Eigen::Index>(docs.size()), config.hidden_dim);
    for (std::size_t start = 0; start < docs.size(); start += static_cast<std::size_t>(chunk)) {
        const std::size_t end = std::min(docs.size(), start + static_cast<std::size_t>(chunk));
        std::vector<TokenSequence> batch;
        batch.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) batch.push_back(tokenize_doc(docs[i]));
        pad_batch(batch);
        out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(end - start)) =
            plm_encode_values(params, config, batch);
    }
    return out;
}

std::uint64_t TextEncoder::content_hash() const {
    Fnv1a h;
    h.update_pod(config.vocab_size);
    h.update_pod(config.hidden_dim);
    h.update_pod(config.num_layers);
    h.update_pod(config.num_heads);
    h.update_pod(config.max_sequence_length);
    for (const auto& tok : vocab.id_to_token) {
        h.update(tok);
        h.update("\x1f");
    }
    for (const auto& t : params.tensors()) {
        h.update(t.name);
        h.update(t.value.data(), sizeof(double) * static_cast<std::size_t>(t.value.size()));
    }
    return h.digest();
}

ad::Mat quantize_to_float(const ad::Mat& m) {
    ad::Mat out(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out(r, c) = static_cast<double>(static_cast<float>(m(r, c)));
        }
    }
    return out;
}

EmbeddingMatrix compute_initial_features(const TagGraph& graph, const TextEncoder& frozen) {
    EmbeddingMatrix emb;
    emb.role = EmbeddingRole::initial_features;
    emb.values = quantize_to_float(frozen.encode_documents(graph.documents()));
    emb.check_finite();
    return emb;
}

void write_embedding_cache(const std::string& path, const EmbeddingMatrix& emb,
                           std::uint64_t config_hash) {
    emb.check_finite();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write embedding cache: " + path);
    out.write(kMagic, sizeof(kMagic));
    const auto role = static_cast<std::uint32_t>(emb.role);
    const auto rows = static_cast<std::uint64_t>(emb.rows());
    const auto cols = static_cast<std::uint64_t>(emb.dim());
    out.write(reinterpret_cast<const char*>(&role), sizeof(role));
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(&config_hash), sizeof(config_hash));
    std::vector<float> row(static_cast<std::size_t>(cols));
    for (Eigen::Index r = 0; r < emb.rows(); ++r) {
        for (Eigen::Index c = 0; c < emb.dim(); ++c) {
            row[static_cast<std::size_t>(c)] = static_cast<float>(emb.values(r, c));
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(sizeof(float) * row.size()));
    }
    if (!out) throw std::runtime_error("short write to embedding cache: " + path);
}

EmbeddingCache read_embedding_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open embedding cache: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("not an embedding cache file: " + path);
    }
    std::uint32_t role;
    std::uint64_t rows, cols, hash;
    in.read(reinterpret_cast<char*>(&role), sizeof(role));
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
    if (!in || role > 3) throw std::runtime_error("corrupt embedding cache header: " + path);

    EmbeddingCache cache;
    cache.config_hash = hash;
    cache.emb.role = static_cast<EmbeddingRole>(role);
    cache.emb.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<float> row(static_cast<std::size_t>(cols));
    for (std::uint64_t r = 0; r < rows; ++r) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(sizeof(float) * row.size()));
        if (!in) throw std::runtime_error("truncated embedding cache: " + path);
        for (std::uint64_t c = 0; c < cols; ++c) {
            cache.emb.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                static_cast<double>(row[static_cast<std::size_t>(c)]);
        }
    }
    return cache;
}

EmbeddingMatrix load_features_for_graph(const std::string& path, const TagGraph& graph,
                                        std::uint64_t expected_hash) {
    EmbeddingCache cache = read_embedding_cache(path);
    if (cache.emb.rows() != graph.num_nodes()) {
        throw std::runtime_error("cache/graph node-count mismatch: cache has " +
                                 std::to_string(cache.emb.rows()) + " rows, graph has " +
                                 std::to_string(graph.num_nodes()) + " nodes");
    }
    if (expected_hash != 0 && cache.config_hash != expected_hash) {
        throw std::runtime_error("embedding cache hash mismatch: " + path);
    }
    cache.emb.check_finite();
    return std::move(cache.emb);
}

}  // namespace tagembed
