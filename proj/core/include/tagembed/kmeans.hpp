#pragma once
// k-means++ seeding followed by Lloyd iterations to an assignment fixpoint
// (max 300); empty clusters are re-seeded from the point farthest from its
// assigned center.

#include <Eigen/Dense>

#include <vector>

#include "tagembed/rng.hpp"

namespace tagembed {

struct KMeansResult {
    std::vector<int> assignments;
    Eigen::MatrixXd centers;
    double inertia = 0.0;          // final sum of squared distances
    double seeding_inertia = 0.0;  // inertia right after k-means++ seeding
    int iterations = 0;
};

KMeansResult kmeans_pp(const Eigen::MatrixXd& points, int num_clusters, rng::Engine& eng,
                       int max_iterations = 300);

}  // namespace tagembed
