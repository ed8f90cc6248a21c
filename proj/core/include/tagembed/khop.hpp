#pragma once
// K-hop reachability index: for each node, the sorted set of nodes within
// shortest-path distance K, excluding the node itself. Precomputed once,
// read-only afterwards.

#include "tagembed/graph.hpp"
#include "tagembed/rng.hpp"

namespace tagembed {

struct NeighborhoodIndex {
    int hop_count = 1;
    std::vector<std::vector<NodeId>> reach;  // sorted, self excluded

    const std::vector<NodeId>& at(NodeId i) const {
        if (i < 0 || static_cast<std::size_t>(i) >= reach.size()) {
            throw std::out_of_range("node id out of range");
        }
        return reach[static_cast<std::size_t>(i)];
    }
};

// Breadth-first expansion from every node, truncated at depth K.
NeighborhoodIndex build_khop_index(const TagGraph& graph, int hop_count);

// min(sample_size, |index[node]|) distinct ids drawn uniformly without
// replacement; empty for isolated nodes.
std::vector<NodeId> sample_neighbors(const NeighborhoodIndex& index, NodeId node,
                                     int sample_size, rng::Engine& eng);

}  // namespace tagembed
