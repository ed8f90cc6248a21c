#include "tagembed/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "tagembed/losses.hpp"

namespace tagembed {

namespace {

// Contingency counts n[c][l] plus marginals.
struct Contingency {
    std::map<int, std::map<int, std::int64_t>> cells;
    std::map<int, std::int64_t> cluster_sizes;
    std::map<int, std::int64_t> label_sizes;
    std::int64_t n = 0;
};

Contingency contingency(const std::vector<int>& clusters, const std::vector<int>& labels) {
    if (clusters.size() != labels.size() || clusters.empty()) {
        throw std::invalid_argument("metrics: clusters/labels must be same nonzero length");
    }
    Contingency t;
    t.n = static_cast<std::int64_t>(clusters.size());
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        t.cells[clusters[i]][labels[i]] += 1;
        t.cluster_sizes[clusters[i]] += 1;
        t.label_sizes[labels[i]] += 1;
    }
    return t;
}

double choose2(std::int64_t v) { return 0.5 * static_cast<double>(v) * static_cast<double>(v - 1); }

}  // namespace

double clustering_accuracy(const std::vector<int>& clusters, const std::vector<int>& labels) {
    const Contingency t = contingency(clusters, labels);
    std::int64_t correct = 0;
    for (const auto& [cluster, row] : t.cells) {
        std::int64_t best = 0;
        for (const auto& [label, count] : row) best = std::max(best, count);
        correct += best;
    }
    return static_cast<double>(correct) / static_cast<double>(t.n);
}

double normalized_mutual_information(const std::vector<int>& clusters,
                                     const std::vector<int>& labels) {
    const Contingency t = contingency(clusters, labels);
    if (t.label_sizes.size() < 2) {
        throw std::runtime_error("NMI undefined: labels are single-class");
    }
    const double n = static_cast<double>(t.n);
    double h_clusters = 0.0, h_labels = 0.0, mi = 0.0;
    for (const auto& [c, size] : t.cluster_sizes) {
        const double p = static_cast<double>(size) / n;
        h_clusters -= p * std::log(p);
    }
    for (const auto& [l, size] : t.label_sizes) {
        const double p = static_cast<double>(size) / n;
        h_labels -= p * std::log(p);
    }
    for (const auto& [c, row] : t.cells) {
        for (const auto& [l, count] : row) {
            const double p_joint = static_cast<double>(count) / n;
            const double p_c = static_cast<double>(t.cluster_sizes.at(c)) / n;
            const double p_l = static_cast<double>(t.label_sizes.at(l)) / n;
            mi += p_joint * std::log(p_joint / (p_c * p_l));
        }
    }
    if (h_clusters <= 0.0) return 0.0;  // all points in one cluster: MI is 0
    return mi / std::sqrt(h_clusters * h_labels);
}

double adjusted_rand_index(const std::vector<int>& clusters, const std::vector<int>& labels) {
    const Contingency t = contingency(clusters, labels);
    double sum_cells = 0.0, sum_clusters = 0.0, sum_labels = 0.0;
    for (const auto& [c, row] : t.cells) {
        for (const auto& [l, count] : row) sum_cells += choose2(count);
    }
    for (const auto& [c, size] : t.cluster_sizes) sum_clusters += choose2(size);
    for (const auto& [l, size] : t.label_sizes) sum_labels += choose2(size);
    const double total_pairs = choose2(t.n);
    const double expected = sum_clusters * sum_labels / total_pairs;
    const double max_index = 0.5 * (sum_clusters + sum_labels);
    const double denom = max_index - expected;
    if (denom == 0.0) {
        // Both partitions trivial (all-singletons or one block): identical by
        // construction in this case.
        return 1.0;
    }
    return (sum_cells - expected) / denom;
}

double reciprocal_rank(const Eigen::MatrixXd& embeddings, const LinkQuery& query) {
    const auto check = [&](NodeId id) {
        if (id < 0 || id >= embeddings.rows()) {
            throw std::out_of_range("mrr: missing embedding row for node " + std::to_string(id));
        }
    };
    check(query.source);
    check(query.positive);
    const Eigen::VectorXd src = embeddings.row(query.source).transpose();
    const double positive_score = cosine_sim(src, embeddings.row(query.positive).transpose());
    std::int64_t rank = 1;
    for (const NodeId neg : query.negatives) {
        check(neg);
        const double s = cosine_sim(src, embeddings.row(neg).transpose());
        if (s >= positive_score) ++rank;  // ties resolve against the positive
    }
    return 1.0 / static_cast<double>(rank);
}

double mean_reciprocal_rank(const Eigen::MatrixXd& embeddings, const LinkEvalSet& set) {
    if (set.queries.empty()) throw std::invalid_argument("mrr: empty eval set");
    double total = 0.0;
    for (const auto& q : set.queries) total += reciprocal_rank(embeddings, q);
    return total / static_cast<double>(set.queries.size());
}

}  // namespace tagembed
