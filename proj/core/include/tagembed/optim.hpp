#pragma once
// AdamW with decoupled weight decay. Moments are kept per named tensor;
// only registered (trainable) tensors are touched by step().

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "tagembed/params.hpp"

namespace tagembed {

struct AdamWConfig {
    double learning_rate = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

class AdamW {
  public:
    explicit AdamW(AdamWConfig config = {}) : config_(config) {}

    void register_tensor(const std::string& name, Eigen::Index rows, Eigen::Index cols);
    bool is_registered(const std::string& name) const { return index_.count(name) > 0; }

    // grads must be keyed identically to the registered names; unregistered
    // store tensors are left untouched.
    void step(ParamStore& params,
              const std::unordered_map<std::string, const ad::Mat*>& grads);

    std::int64_t step_count() const { return step_count_; }
    const AdamWConfig& config() const { return config_; }

    // Checkpoint access.
    struct MomentEntry {
        std::string name;
        ad::Mat m;
        ad::Mat v;
    };
    const std::vector<MomentEntry>& moments() const { return moments_; }
    void restore(std::int64_t step_count, std::vector<MomentEntry> moments);

  private:
    AdamWConfig config_;
    std::int64_t step_count_ = 0;
    std::vector<MomentEntry> moments_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace tagembed
