#include "tagembed/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace tagembed {

void AdamW::register_tensor(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (index_.count(name)) throw std::runtime_error("optimizer: tensor already registered: " + name);
    index_[name] = moments_.size();
    moments_.push_back({name, ad::Mat::Zero(rows, cols), ad::Mat::Zero(rows, cols)});
}

void AdamW::step(ParamStore& params,
                 const std::unordered_map<std::string, const ad::Mat*>& grads) {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
    for (auto& entry : moments_) {
        auto it = grads.find(entry.name);
        if (it == grads.end()) {
            throw std::runtime_error("optimizer: missing gradient for " + entry.name);
        }
        const ad::Mat& g = *it->second;
        ad::Mat& theta = params.at(entry.name);
        entry.m = config_.beta1 * entry.m + (1.0 - config_.beta1) * g;
        entry.v = config_.beta2 * entry.v.array().matrix() +
                  (1.0 - config_.beta2) * g.cwiseProduct(g);
        const ad::Mat m_hat = entry.m / bc1;
        const ad::Mat v_hat = entry.v / bc2;
        theta.array() -= config_.learning_rate *
                         (m_hat.array() / (v_hat.array().sqrt() + config_.eps) +
                          config_.weight_decay * theta.array());
    }
}

void AdamW::restore(std::int64_t step_count, std::vector<MomentEntry> moments) {
    step_count_ = step_count;
    moments_ = std::move(moments);
    index_.clear();
    for (std::size_t i = 0; i < moments_.size(); ++i) index_[moments_[i].name] = i;
}

}  // namespace tagembed
