#pragma once
// Clustering-agreement metrics (majority-vote accuracy, NMI with geometric
// normalization, adjusted Rand index) and ranked link-prediction MRR with
// pessimistic tie handling.

#include <Eigen/Dense>

#include <vector>

#include "tagembed/splits.hpp"

namespace tagembed {

// Each cluster is named by its most common label; returns fraction correct.
double clustering_accuracy(const std::vector<int>& clusters, const std::vector<int>& labels);

// I(C;L) / sqrt(H(C) H(L)); throws when the labels are single-class
// (H(L) = 0 leaves the score undefined). All-in-one-cluster inputs give 0.
double normalized_mutual_information(const std::vector<int>& clusters,
                                     const std::vector<int>& labels);

double adjusted_rand_index(const std::vector<int>& clusters, const std::vector<int>& labels);

// Candidates are scored by cosine similarity against the source embedding;
// the positive's rank counts equal-scored negatives above it.
double mean_reciprocal_rank(const Eigen::MatrixXd& embeddings, const LinkEvalSet& set);
double reciprocal_rank(const Eigen::MatrixXd& embeddings, const LinkQuery& query);

}  // namespace tagembed
