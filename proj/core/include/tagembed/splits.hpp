#pragma once
// Downstream-evaluation split construction: ranked link-prediction query
// sets and k-shot labeled subsets.

#include "tagembed/graph.hpp"
#include "tagembed/khop.hpp"
#include "tagembed/rng.hpp"

#include <map>

namespace tagembed {

struct LinkQuery {
    NodeId source = -1;
    NodeId positive = -1;            // a true graph neighbor of source
    std::vector<NodeId> negatives;   // non-neighbors, source excluded
};

struct LinkEvalSet {
    int negatives_per_query = 0;
    std::vector<LinkQuery> queries;
};

// Per query: one uniformly chosen neighbor as the positive, plus
// negatives_per_query distinct non-neighbors (query excluded) as negatives.
// Throws on degree-0 queries or an insufficient non-neighbor pool.
LinkEvalSet make_link_eval_set(const TagGraph& graph, const std::vector<NodeId>& query_nodes,
                               int negatives_per_query, rng::Engine& eng);

struct FewShotSplit {
    int shots_per_class = 0;
    std::map<std::int32_t, std::vector<NodeId>> labeled_by_class;
    std::vector<NodeId> eval_ids;

    std::vector<NodeId> labeled_ids() const {
        std::vector<NodeId> out;
        for (const auto& [cls, ids] : labeled_by_class) {
            out.insert(out.end(), ids.begin(), ids.end());
        }
        return out;
    }
};

// k nodes per class sampled uniformly from the training split; evaluation
// set is the test split. Throws if any class has fewer than k train nodes.
FewShotSplit make_fewshot_split(const TagGraph& graph, int k, rng::Engine& eng);

}  // namespace tagembed
