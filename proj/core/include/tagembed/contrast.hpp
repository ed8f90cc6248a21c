#pragma once
// A training mini-batch for the contrastive objectives: query nodes, their
// sampled K-hop positives, and the derived candidate sets. All loss code
// works on "slots" (row indices into the batch-scoped representation
// matrices); slot order is queries first, then out-of-batch neighbors in
// first-appearance order.

#include <memory>
#include <vector>

#include "tagembed/autodiff.hpp"
#include "tagembed/graph.hpp"

namespace tagembed {

struct LossConfig {
    double temperature = 0.05;
    int hop_count = 1;             // K
    int neighbor_sample_size = 2;  // |N(i)| target per query
    bool use_gc_cl_text = true;
    bool use_gc_cl_gnn = true;
    bool use_nd_ka = true;
    bool use_nbh_ka = true;

    void validate() const;
    bool any_enabled() const {
        return use_gc_cl_text || use_gc_cl_gnn || use_nd_ka || use_nbh_ka;
    }
};

class ContrastBatch {
  public:
    // query_ids must be distinct; sampled_neighbors[q] holds N(i) for
    // query q (distinct ids, self excluded, possibly empty).
    static ContrastBatch assemble(const std::vector<NodeId>& query_ids,
                                  const std::vector<std::vector<NodeId>>& sampled_neighbors);

    const std::vector<NodeId>& ids() const { return ids_; }  // slot -> node id
    int num_queries() const { return num_queries_; }
    int num_slots() const { return static_cast<int>(ids_.size()); }

    bool active(int q) const { return !positives_[static_cast<std::size_t>(q)].empty(); }
    int num_active() const;

    // N(i) as slots.
    const std::vector<int>& positives(int q) const { return positives_[static_cast<std::size_t>(q)]; }
    // C(i) = N(i) union B(i), ascending slots; never contains q.
    const std::vector<int>& candidates(int q) const { return candidates_[static_cast<std::size_t>(q)]; }
    // C~(i) = C(i) union {q}, ascending slots.
    const std::vector<int>& candidates_ext(int q) const {
        return candidates_ext_[static_cast<std::size_t>(q)];
    }

    // Softmax index sets over the active queries, for the tape loss ops.
    // extended=true yields (C~(i), {i} union N(i)) instead of (C(i), N(i)).
    std::shared_ptr<const std::vector<ad::SoftmaxSets>> active_sets(bool extended) const;

  private:
    std::vector<NodeId> ids_;
    int num_queries_ = 0;
    std::vector<std::vector<int>> positives_;
    std::vector<std::vector<int>> candidates_;
    std::vector<std::vector<int>> candidates_ext_;
};

}  // namespace tagembed
