#include "tagembed/khop.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace tagembed {

NeighborhoodIndex build_khop_index(const TagGraph& graph, int hop_count) {
    if (hop_count < 1) throw std::invalid_argument("hop_count must be >= 1");
    const auto n = graph.num_nodes();
    NeighborhoodIndex index;
    index.hop_count = hop_count;
    index.reach.assign(static_cast<std::size_t>(n), {});

    std::vector<int> dist(static_cast<std::size_t>(n));
    for (NodeId src = 0; src < n; ++src) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[static_cast<std::size_t>(src)] = 0;
        std::deque<NodeId> frontier{src};
        auto& out = index.reach[static_cast<std::size_t>(src)];
        while (!frontier.empty()) {
            const NodeId u = frontier.front();
            frontier.pop_front();
            if (dist[static_cast<std::size_t>(u)] == hop_count) continue;
            for (const NodeId v : graph.neighbors(u)) {
                if (dist[static_cast<std::size_t>(v)] == -1) {
                    dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                    out.push_back(v);
                    frontier.push_back(v);
                }
            }
        }
        std::sort(out.begin(), out.end());
    }
    return index;
}

std::vector<NodeId> sample_neighbors(const NeighborhoodIndex& index, NodeId node,
                                     int sample_size, rng::Engine& eng) {
    if (sample_size < 1) throw std::invalid_argument("sample_size must be >= 1");
    const auto& pool = index.at(node);
    if (pool.empty()) return {};
    return rng::sample_without_replacement(pool, static_cast<std::size_t>(sample_size), eng);
}

}  // namespace tagembed
