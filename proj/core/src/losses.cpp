#include "tagembed/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace tagembed {

double cosine_sim(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine_sim: dimension mismatch");
    const double nu = std::max(u.norm(), kCosineNormEps);
    const double nv = std::max(v.norm(), kCosineNormEps);
    return u.dot(v) / (nu * nv);
}

SimilarityDistribution neighborhood_distribution(const ad::Mat& reps, const ContrastBatch& batch,
                                                 int query_slot, double tau) {
    if (query_slot < 0 || query_slot >= batch.num_queries()) {
        throw std::invalid_argument("neighborhood_distribution: query slot out of range");
    }
    const auto& cand = batch.candidates(query_slot);
    if (cand.empty()) throw std::runtime_error("neighborhood_distribution: empty candidate set");

    SimilarityDistribution dist;
    dist.query = batch.ids()[static_cast<std::size_t>(query_slot)];
    Eigen::VectorXd logits(static_cast<Eigen::Index>(cand.size()));
    const Eigen::VectorXd qrow = reps.row(query_slot).transpose();
    for (std::size_t k = 0; k < cand.size(); ++k) {
        dist.candidates.push_back(batch.ids()[static_cast<std::size_t>(cand[k])]);
        const Eigen::VectorXd crow = reps.row(cand[k]).transpose();
        logits(static_cast<Eigen::Index>(k)) = cosine_sim(qrow, crow) / tau;
    }
    const double mx = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - mx).exp();
    dist.probabilities = e / e.sum();
    return dist;
}

double kl_divergence(const SimilarityDistribution& p, const SimilarityDistribution& q) {
    if (p.candidates != q.candidates) {
        throw std::invalid_argument("kl_divergence: candidate-set mismatch");
    }
    double kl = 0.0;
    for (Eigen::Index k = 0; k < p.probabilities.size(); ++k) {
        const double pk = p.probabilities(k);
        if (pk <= 0.0) continue;
        kl += pk * (std::log(pk) - std::log(q.probabilities(k)));
    }
    return kl;
}

ad::Var gc_cl_term(ad::Tape& tape, ad::Var reps, const ContrastBatch& batch, double tau) {
    ad::Var unit = tape.row_normalize(reps, kCosineNormEps);
    ad::Var sim = tape.matmul_nt(unit, unit);
    return tape.infonce_set(sim, batch.active_sets(/*extended=*/false), tau);
}

ad::Var nd_ka_term(ad::Tape& tape, ad::Var text_reps, ad::Var gnn_reps,
                   const ContrastBatch& batch, double tau) {
    if (tape.value(text_reps).cols() != tape.value(gnn_reps).cols()) {
        throw std::invalid_argument("nd_ka: modality dimension mismatch (no projection configured)");
    }
    ad::Var unit_text = tape.row_normalize(text_reps, kCosineNormEps);
    ad::Var unit_gnn = tape.row_normalize(gnn_reps, kCosineNormEps);
    // cross(a, b) = sim(e_a, d_b); the op consumes rows for the GNN-query
    // direction and columns for the text-query direction.
    ad::Var cross = tape.matmul_nt(unit_gnn, unit_text);
    return tape.ndka_set(cross, batch.active_sets(/*extended=*/true), tau);
}

ad::Var nbh_ka_term(ad::Tape& tape, ad::Var text_reps, ad::Var gnn_reps,
                    const ContrastBatch& batch, double tau) {
    ad::Var unit_text = tape.row_normalize(text_reps, kCosineNormEps);
    ad::Var unit_gnn = tape.row_normalize(gnn_reps, kCosineNormEps);
    ad::Var sim_text = tape.matmul_nt(unit_text, unit_text);
    ad::Var sim_gnn = tape.matmul_nt(unit_gnn, unit_gnn);
    return tape.sym_kl_set(sim_text, sim_gnn, batch.active_sets(/*extended=*/false), tau);
}

LossTerms total_loss_on_tape(ad::Tape& tape, ad::Var text_reps, ad::Var gnn_reps,
                             const ContrastBatch& batch, const LossConfig& config) {
    config.validate();
    const double tau = config.temperature;
    const auto sets = batch.active_sets(/*extended=*/false);

    std::optional<ad::Var> unit_text, unit_gnn, sim_text, sim_gnn;
    auto text_unit = [&] {
        if (!unit_text) unit_text = tape.row_normalize(text_reps, kCosineNormEps);
        return *unit_text;
    };
    auto gnn_unit = [&] {
        if (!unit_gnn) unit_gnn = tape.row_normalize(gnn_reps, kCosineNormEps);
        return *unit_gnn;
    };
    auto text_sim = [&] {
        if (!sim_text) sim_text = tape.matmul_nt(text_unit(), text_unit());
        return *sim_text;
    };
    auto gnn_sim = [&] {
        if (!sim_gnn) sim_gnn = tape.matmul_nt(gnn_unit(), gnn_unit());
        return *sim_gnn;
    };

    LossTerms terms;
    std::optional<ad::Var> total;
    auto accumulate = [&](ad::Var v) {
        total = total ? tape.add(*total, v) : v;
    };

    if (config.use_gc_cl_text) {
        terms.gc_cl_text = tape.infonce_set(text_sim(), sets, tau);
        accumulate(*terms.gc_cl_text);
    }
    if (config.use_gc_cl_gnn) {
        terms.gc_cl_gnn = tape.infonce_set(gnn_sim(), sets, tau);
        accumulate(*terms.gc_cl_gnn);
    }
    if (config.use_nd_ka) {
        if (tape.value(text_reps).cols() != tape.value(gnn_reps).cols()) {
            throw std::invalid_argument(
                "nd_ka: modality dimension mismatch (no projection configured)");
        }
        ad::Var cross = tape.matmul_nt(gnn_unit(), text_unit());
        terms.nd_ka = tape.ndka_set(cross, batch.active_sets(/*extended=*/true), tau);
        accumulate(*terms.nd_ka);
    }
    if (config.use_nbh_ka) {
        terms.nbh_ka = tape.sym_kl_set(text_sim(), gnn_sim(), sets, tau);
        accumulate(*terms.nbh_ka);
    }
    terms.total = *total;
    return terms;
}

double gc_cl_loss(const ad::Mat& reps, const ContrastBatch& batch, double tau) {
    ad::Tape tape;
    return tape.value(gc_cl_term(tape, tape.leaf(reps), batch, tau))(0, 0);
}

double nd_ka_loss(const ad::Mat& text_reps, const ad::Mat& gnn_reps, const ContrastBatch& batch,
                  double tau) {
    ad::Tape tape;
    return tape.value(
        nd_ka_term(tape, tape.leaf(text_reps), tape.leaf(gnn_reps), batch, tau))(0, 0);
}

double nbh_ka_loss(const ad::Mat& text_reps, const ad::Mat& gnn_reps, const ContrastBatch& batch,
                   double tau) {
    ad::Tape tape;
    return tape.value(
        nbh_ka_term(tape, tape.leaf(text_reps), tape.leaf(gnn_reps), batch, tau))(0, 0);
}

LossBreakdown total_loss(const ad::Mat& text_reps, const ad::Mat& gnn_reps,
                         const ContrastBatch& batch, const LossConfig& config) {
    ad::Tape tape;
    const LossTerms terms = total_loss_on_tape(tape, tape.leaf(text_reps), tape.leaf(gnn_reps),
                                               batch, config);
    LossBreakdown out;
    out.total = tape.value(terms.total)(0, 0);
    if (terms.gc_cl_text) out.gc_cl_text = tape.value(*terms.gc_cl_text)(0, 0);
    if (terms.gc_cl_gnn) out.gc_cl_gnn = tape.value(*terms.gc_cl_gnn)(0, 0);
    if (terms.nd_ka) out.nd_ka = tape.value(*terms.nd_ka)(0, 0);
    if (terms.nbh_ka) out.nbh_ka = tape.value(*terms.nbh_ka)(0, 0);
    return out;
}

}  // namespace tagembed
