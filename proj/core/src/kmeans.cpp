#include "tagembed/kmeans.hpp"

#include <limits>
#include <stdexcept>

namespace tagembed {

namespace {

double sq_dist(const Eigen::MatrixXd& points, Eigen::Index p, const Eigen::MatrixXd& centers,
               Eigen::Index c) {
    return (points.row(p) - centers.row(c)).squaredNorm();
}

// Nearest center per point; returns total inertia.
double assign_all(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                  std::vector<int>& assignments) {
    double inertia = 0.0;
    for (Eigen::Index p = 0; p < points.rows(); ++p) {
        double best = std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (Eigen::Index c = 0; c < centers.rows(); ++c) {
            const double d = sq_dist(points, p, centers, c);
            if (d < best) {
                best = d;
                best_c = static_cast<int>(c);
            }
        }
        assignments[static_cast<std::size_t>(p)] = best_c;
        inertia += best;
    }
    return inertia;
}

}  // namespace

KMeansResult kmeans_pp(const Eigen::MatrixXd& points, int num_clusters, rng::Engine& eng,
                       int max_iterations) {
    const auto n = points.rows();
    if (num_clusters < 1) throw std::invalid_argument("kmeans: num_clusters must be >= 1");
    if (n < num_clusters) throw std::invalid_argument("kmeans: fewer points than clusters");

    Eigen::MatrixXd centers(num_clusters, points.cols());
    centers.row(0) = points.row(static_cast<Eigen::Index>(rng::uniform_index(
        eng, static_cast<std::size_t>(n))));

    Eigen::VectorXd min_sq(n);
    for (Eigen::Index p = 0; p < n; ++p) min_sq(p) = sq_dist(points, p, centers, 0);
    for (int c = 1; c < num_clusters; ++c) {
        const double total = min_sq.sum();
        Eigen::Index chosen;
        if (total <= 0.0) {
            // All remaining mass at distance zero: fall back to uniform.
            chosen = static_cast<Eigen::Index>(rng::uniform_index(eng, static_cast<std::size_t>(n)));
        } else {
            const double target = rng::uniform01(eng) * total;
            double acc = 0.0;
            chosen = n - 1;
            for (Eigen::Index p = 0; p < n; ++p) {
                acc += min_sq(p);
                if (acc >= target) {
                    chosen = p;
                    break;
                }
            }
        }
        centers.row(c) = points.row(chosen);
        for (Eigen::Index p = 0; p < n; ++p) {
            min_sq(p) = std::min(min_sq(p), sq_dist(points, p, centers, c));
        }
    }

    KMeansResult result;
    result.assignments.assign(static_cast<std::size_t>(n), 0);
    result.seeding_inertia = assign_all(points, centers, result.assignments);

    std::vector<int> counts(static_cast<std::size_t>(num_clusters));
    for (int it = 0; it < max_iterations; ++it) {
        // Update step.
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(num_clusters, points.cols());
        std::fill(counts.begin(), counts.end(), 0);
        for (Eigen::Index p = 0; p < n; ++p) {
            const int c = result.assignments[static_cast<std::size_t>(p)];
            sums.row(c) += points.row(p);
            ++counts[static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < num_clusters; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
            }
        }
        // Re-seed empty clusters from the farthest point.
        for (int c = 0; c < num_clusters; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far_p = 0;
            double far_d = -1.0;
            for (Eigen::Index p = 0; p < n; ++p) {
                const double d =
                    sq_dist(points, p, centers, result.assignments[static_cast<std::size_t>(p)]);
                if (d > far_d) {
                    far_d = d;
                    far_p = p;
                }
            }
            centers.row(c) = points.row(far_p);
        }

        std::vector<int> next(result.assignments.size());
        const double inertia = assign_all(points, centers, next);
        result.iterations = it + 1;
        const bool converged = next == result.assignments;
        result.assignments = std::move(next);
        result.inertia = inertia;
        if (converged) break;
    }
    result.centers = std::move(centers);
    return result;
}

}  // namespace tagembed
