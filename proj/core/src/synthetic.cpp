#include "tagembed/synthetic.hpp"

#include <stdexcept>
#include <string>

#include "tagembed/rng.hpp"

namespace tagembed {

TagGraph generate_synthetic_tag(const SyntheticConfig& config) {
    if (config.num_classes < 1 || config.nodes_per_class < 1) {
        throw std::invalid_argument("num_classes and nodes_per_class must be positive");
    }
    if (!(config.p_out >= 0.0 && config.p_out < config.p_in && config.p_in <= 1.0)) {
        throw std::invalid_argument("require 0 <= p_out < p_in <= 1");
    }
    if (!(config.noise_rate >= 0.0 && config.noise_rate < 1.0)) {
        throw std::invalid_argument("noise_rate must be in [0, 1)");
    }
    if (config.vocab_per_class < 1 || config.doc_length < 1) {
        throw std::invalid_argument("vocab_per_class and doc_length must be positive");
    }
    if (config.train_fraction < 0.0 || config.valid_fraction < 0.0 ||
        config.train_fraction + config.valid_fraction > 1.0) {
        throw std::invalid_argument("split fractions must be non-negative and sum to <= 1");
    }

    const int n = config.num_classes * config.nodes_per_class;
    std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        labels[static_cast<std::size_t>(i)] = i / config.nodes_per_class;
    }

    auto edge_rng = rng::make(rng::derive(config.seed, 1));
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double p = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]
                                 ? config.p_in
                                 : config.p_out;
            if (rng::bernoulli(edge_rng, p)) {
                edges.emplace_back(i, j);
            }
        }
    }

    auto text_rng = rng::make(rng::derive(config.seed, 2));
    std::vector<Document> docs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int cls = labels[static_cast<std::size_t>(i)];
        std::string text;
        for (int t = 0; t < config.doc_length; ++t) {
            if (t > 0) text += ' ';
            const auto word = rng::uniform_index(text_rng, static_cast<std::size_t>(config.vocab_per_class));
            if (rng::bernoulli(text_rng, config.noise_rate)) {
                text += "nz" + std::to_string(word);
            } else {
                text += "c" + std::to_string(cls) + "w" + std::to_string(word);
            }
        }
        docs[static_cast<std::size_t>(i)] = Document{static_cast<NodeId>(i), std::move(text), {}};
    }

    auto split_rng = rng::make(rng::derive(config.seed, 3));
    std::vector<Split> splits(static_cast<std::size_t>(n), Split::test);
    const int train_per_class = static_cast<int>(config.train_fraction * config.nodes_per_class);
    const int valid_per_class = static_cast<int>(config.valid_fraction * config.nodes_per_class);
    for (int cls = 0; cls < config.num_classes; ++cls) {
        std::vector<NodeId> members;
        for (int i = cls * config.nodes_per_class; i < (cls + 1) * config.nodes_per_class; ++i) {
            members.push_back(i);
        }
        rng::shuffle(members, split_rng);
        for (int k = 0; k < static_cast<int>(members.size()); ++k) {
            const auto node = static_cast<std::size_t>(members[static_cast<std::size_t>(k)]);
            if (k < train_per_class) {
                splits[node] = Split::train;
            } else if (k < train_per_class + valid_per_class) {
                splits[node] = Split::valid;
            }
        }
    }

    return TagGraph(std::move(docs), edges, std::move(labels), std::move(splits));
}

}  // namespace tagembed
