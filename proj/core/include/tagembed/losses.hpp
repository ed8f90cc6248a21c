#pragma once
// The four self-supervised objectives: single-modality neighbor-positive
// contrastive losses on text and GNN representations, node-level
// cross-modal alignment, and symmetric-KL alignment of neighborhood
// similarity distributions. Value-level wrappers mirror the tape builders
// for tests and oracles.

#include <optional>

#include "tagembed/autodiff.hpp"
#include "tagembed/contrast.hpp"

namespace tagembed {

inline constexpr double kCosineNormEps = 1e-8;

// u.v / (max(|u|,eps) * max(|v|,eps)); throws on dimension mismatch.
double cosine_sim(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct SimilarityDistribution {
    NodeId query = -1;
    std::vector<NodeId> candidates;     // fixed order, shared across modalities
    Eigen::VectorXd probabilities;      // same length as candidates, sums to 1
};

// softmax over C(i) of sim(rep_query, rep_j)/tau, max-subtracted.
SimilarityDistribution neighborhood_distribution(const ad::Mat& reps, const ContrastBatch& batch,
                                                 int query_slot, double tau);

// sum_j P_j ln(P_j/Q_j) with 0 ln 0 = 0; throws on candidate-set mismatch.
double kl_divergence(const SimilarityDistribution& p, const SimilarityDistribution& q);

// --- tape builders (slot-aligned representation matrices) ---
ad::Var gc_cl_term(ad::Tape& tape, ad::Var reps, const ContrastBatch& batch, double tau);
ad::Var nd_ka_term(ad::Tape& tape, ad::Var text_reps, ad::Var gnn_reps,
                   const ContrastBatch& batch, double tau);
ad::Var nbh_ka_term(ad::Tape& tape, ad::Var text_reps, ad::Var gnn_reps,
                    const ContrastBatch& batch, double tau);

struct LossTerms {
    ad::Var total;
    std::optional<ad::Var> gc_cl_text;
    std::optional<ad::Var> gc_cl_gnn;
    std::optional<ad::Var> nd_ka;
    std::optional<ad::Var> nbh_ka;
};

// Sum of the enabled terms; similarity matrices are shared across terms.
LossTerms total_loss_on_tape(ad::Tape& tape, ad::Var text_reps, ad::Var gnn_reps,
                             const ContrastBatch& batch, const LossConfig& config);

// --- value-level wrappers ---
double gc_cl_loss(const ad::Mat& reps, const ContrastBatch& batch, double tau);
double nd_ka_loss(const ad::Mat& text_reps, const ad::Mat& gnn_reps, const ContrastBatch& batch,
                  double tau);
double nbh_ka_loss(const ad::Mat& text_reps, const ad::Mat& gnn_reps, const ContrastBatch& batch,
                   double tau);

struct LossBreakdown {
    double total = 0.0;
    double gc_cl_text = 0.0;
    double gc_cl_gnn = 0.0;
    double nd_ka = 0.0;
    double nbh_ka = 0.0;
};

LossBreakdown total_loss(const ad::Mat& text_reps, const ad::Mat& gnn_reps,
                         const ContrastBatch& batch, const LossConfig& config);

}  // namespace tagembed
