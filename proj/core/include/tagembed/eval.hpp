#pragma once
// Downstream evaluation of exported embeddings: few-shot / full-data node
// classification, k-means++ clustering scored by ACC/NMI/ARI, and
// link-prediction MRR. Every repeat owns an rng stream derived from
// (base seed, repeat index).

#include <map>
#include <string>

#include "tagembed/graph.hpp"
#include "tagembed/metrics.hpp"
#include "tagembed/probes.hpp"
#include "tagembed/splits.hpp"

namespace tagembed {

struct EvalReport {
    std::string task;
    std::map<std::string, std::vector<double>> metrics;  // per-repeat values
    std::string config_snapshot;  // JSON string of the settings used

    int repeats() const;
    double mean(const std::string& metric) const;
    double stddev(const std::string& metric) const;  // population std
};

// Per repeat: fresh k-shot split, freshly initialized probe, test accuracy.
EvalReport eval_fewshot_clf(const Eigen::MatrixXd& embeddings, const TagGraph& graph, int k,
                            const ProbeConfig& probe, int repeats, std::uint64_t seed);

// Full train split; repeats differ in probe initialization.
EvalReport eval_full_clf(const Eigen::MatrixXd& embeddings, const TagGraph& graph,
                         const ProbeConfig& probe, int repeats, std::uint64_t seed);

// k-means++ with num_clusters = num classes, one seeded run per repeat.
// Scores against labels of the test split (or of all nodes).
EvalReport eval_clustering(const Eigen::MatrixXd& embeddings, const TagGraph& graph, int runs,
                           std::uint64_t seed, bool test_split_only = true);

EvalReport eval_link_mrr(const Eigen::MatrixXd& embeddings, const LinkEvalSet& eval_set);

void write_report_table(const std::string& path, const EvalReport& report);
void write_report_summary(const std::string& path, const EvalReport& report);
std::string format_report(const EvalReport& report);

// 0-based dense class indices in ascending label order, for probe targets.
std::map<std::int32_t, int> class_index_map(const TagGraph& graph);

}  // namespace tagembed
