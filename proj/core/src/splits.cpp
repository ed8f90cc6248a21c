#include "tagembed/splits.hpp"

#include <algorithm>
#include <stdexcept>

namespace tagembed {

LinkEvalSet make_link_eval_set(const TagGraph& graph, const std::vector<NodeId>& query_nodes,
                               int negatives_per_query, rng::Engine& eng) {
    if (negatives_per_query < 1) throw std::invalid_argument("negatives_per_query must be >= 1");
    LinkEvalSet set;
    set.negatives_per_query = negatives_per_query;
    set.queries.reserve(query_nodes.size());

    for (const NodeId q : query_nodes) {
        const auto& nbrs = graph.neighbors(q);
        if (nbrs.empty()) {
            throw std::runtime_error("link query node " + std::to_string(q) + " has degree 0");
        }
        LinkQuery query;
        query.source = q;
        query.positive = nbrs[rng::uniform_index(eng, nbrs.size())];

        std::vector<NodeId> pool;
        pool.reserve(static_cast<std::size_t>(graph.num_nodes()));
        for (NodeId v = 0; v < graph.num_nodes(); ++v) {
            if (v != q && !graph.has_edge(q, v)) pool.push_back(v);
        }
        if (pool.size() < static_cast<std::size_t>(negatives_per_query)) {
            throw std::runtime_error("insufficient non-neighbor pool for query node " +
                                     std::to_string(q));
        }
        query.negatives =
            rng::sample_without_replacement(pool, static_cast<std::size_t>(negatives_per_query), eng);
        set.queries.push_back(std::move(query));
    }
    return set;
}

FewShotSplit make_fewshot_split(const TagGraph& graph, int k, rng::Engine& eng) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!graph.has_labels()) throw std::runtime_error("few-shot split requires labels");
    if (!graph.has_splits()) throw std::runtime_error("few-shot split requires train/test splits");

    std::map<std::int32_t, std::vector<NodeId>> train_by_class;
    for (const NodeId i : graph.split_members(Split::train)) {
        train_by_class[graph.label(i)].push_back(i);
    }

    FewShotSplit out;
    out.shots_per_class = k;
    for (const std::int32_t cls : graph.label_set()) {
        auto it = train_by_class.find(cls);
        const std::size_t available = it == train_by_class.end() ? 0 : it->second.size();
        if (available < static_cast<std::size_t>(k)) {
            throw std::runtime_error("class " + std::to_string(cls) + " has only " +
                                     std::to_string(available) + " train nodes, need " +
                                     std::to_string(k));
        }
        auto sampled = rng::sample_without_replacement(it->second, static_cast<std::size_t>(k), eng);
        std::sort(sampled.begin(), sampled.end());
        out.labeled_by_class[cls] = std::move(sampled);
    }
    out.eval_ids = graph.split_members(Split::test);
    return out;
}

}  // namespace tagembed
