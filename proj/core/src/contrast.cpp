#include "tagembed/contrast.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace tagembed {

void LossConfig::validate() const {
    if (temperature <= 0.0) throw std::invalid_argument("loss: temperature must be positive");
    if (hop_count < 1) throw std::invalid_argument("loss: hop_count must be >= 1");
    if (neighbor_sample_size < 1) {
        throw std::invalid_argument("loss: neighbor_sample_size must be >= 1");
    }
    if (!any_enabled()) throw std::invalid_argument("loss: all terms disabled");
}

ContrastBatch ContrastBatch::assemble(const std::vector<NodeId>& query_ids,
                                      const std::vector<std::vector<NodeId>>& sampled_neighbors) {
    if (query_ids.empty()) throw std::invalid_argument("batch: no query nodes");
    if (sampled_neighbors.size() != query_ids.size()) {
        throw std::invalid_argument("batch: one neighbor list per query required");
    }

    ContrastBatch b;
    b.num_queries_ = static_cast<int>(query_ids.size());
    b.ids_ = query_ids;

    std::unordered_map<NodeId, int> slot_of;
    for (int q = 0; q < b.num_queries_; ++q) {
        const NodeId id = query_ids[static_cast<std::size_t>(q)];
        if (!slot_of.emplace(id, q).second) {
            throw std::invalid_argument("batch: duplicate query id " + std::to_string(id));
        }
    }

    b.positives_.resize(query_ids.size());
    for (int q = 0; q < b.num_queries_; ++q) {
        for (const NodeId p : sampled_neighbors[static_cast<std::size_t>(q)]) {
            if (p == query_ids[static_cast<std::size_t>(q)]) {
                throw std::invalid_argument("batch: node sampled as its own neighbor");
            }
            auto it = slot_of.find(p);
            int slot;
            if (it == slot_of.end()) {
                slot = static_cast<int>(b.ids_.size());
                slot_of.emplace(p, slot);
                b.ids_.push_back(p);
            } else {
                slot = it->second;
            }
            b.positives_[static_cast<std::size_t>(q)].push_back(slot);
        }
        auto& pos = b.positives_[static_cast<std::size_t>(q)];
        std::sort(pos.begin(), pos.end());
        pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    }

    b.candidates_.resize(query_ids.size());
    b.candidates_ext_.resize(query_ids.size());
    for (int q = 0; q < b.num_queries_; ++q) {
        std::vector<bool> member(b.ids_.size(), false);
        for (int other = 0; other < b.num_queries_; ++other) {
            if (other != q) member[static_cast<std::size_t>(other)] = true;  // B(i)
        }
        for (const int p : b.positives_[static_cast<std::size_t>(q)]) {
            member[static_cast<std::size_t>(p)] = true;  // N(i); union collapses duplicates
        }
        auto& cand = b.candidates_[static_cast<std::size_t>(q)];
        for (int s = 0; s < static_cast<int>(b.ids_.size()); ++s) {
            if (member[static_cast<std::size_t>(s)]) cand.push_back(s);
        }
        auto& ext = b.candidates_ext_[static_cast<std::size_t>(q)];
        member[static_cast<std::size_t>(q)] = true;
        for (int s = 0; s < static_cast<int>(b.ids_.size()); ++s) {
            if (member[static_cast<std::size_t>(s)]) ext.push_back(s);
        }
    }
    return b;
}

int ContrastBatch::num_active() const {
    int n = 0;
    for (int q = 0; q < num_queries_; ++q) {
        if (active(q)) ++n;
    }
    return n;
}

std::shared_ptr<const std::vector<ad::SoftmaxSets>> ContrastBatch::active_sets(bool extended) const {
    auto sets = std::make_shared<std::vector<ad::SoftmaxSets>>();
    for (int q = 0; q < num_queries_; ++q) {
        if (!active(q)) continue;
        ad::SoftmaxSets s;
        s.row = q;
        if (extended) {
            s.candidates = candidates_ext(q);
            s.positives = positives(q);
            s.positives.push_back(q);
            std::sort(s.positives.begin(), s.positives.end());
        } else {
            s.candidates = candidates(q);
            s.positives = positives(q);
        }
        sets->push_back(std::move(s));
    }
    if (sets->empty()) {
        throw std::runtime_error("batch has no query with sampled positives");
    }
    return sets;
}

}  // namespace tagembed
