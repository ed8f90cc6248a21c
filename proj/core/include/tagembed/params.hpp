#pragma once
// Named-tensor parameter store shared by encoders, probes, the optimizer
// and the checkpoint format. Iteration order is registration order and is
// part of the determinism contract.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tagembed/autodiff.hpp"

namespace tagembed {

struct NamedTensor {
    std::string name;
    ad::Mat value;
};

class ParamStore {
  public:
    ad::Mat& add(const std::string& name, ad::Mat init) {
        if (index_.count(name)) throw std::runtime_error("duplicate parameter name: " + name);
        index_[name] = tensors_.size();
        tensors_.push_back({name, std::move(init)});
        return tensors_.back().value;
    }
    bool contains(const std::string& name) const { return index_.count(name) > 0; }
    ad::Mat& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::runtime_error("unknown parameter: " + name);
        return tensors_[it->second].value;
    }
    const ad::Mat& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::runtime_error("unknown parameter: " + name);
        return tensors_[it->second].value;
    }
    std::vector<NamedTensor>& tensors() { return tensors_; }
    const std::vector<NamedTensor>& tensors() const { return tensors_; }
    std::size_t size() const { return tensors_.size(); }

  private:
    std::vector<NamedTensor> tensors_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Tape leaves for every tensor of a store, so one backward() pass yields
// gradients for all of them.
class BoundParams {
  public:
    BoundParams(ad::Tape& tape, const ParamStore& store, bool trainable) : tape_(&tape) {
        for (const auto& t : store.tensors()) {
            vars_.emplace(t.name, tape.leaf(t.value, trainable));
        }
    }
    ad::Var var(const std::string& name) const {
        auto it = vars_.find(name);
        if (it == vars_.end()) throw std::runtime_error("unbound parameter: " + name);
        return it->second;
    }
    // Gradient of a bound tensor after backward().
    const ad::Mat& grad(const std::string& name) const { return tape_->grad(var(name)); }

  private:
    ad::Tape* tape_;
    std::unordered_map<std::string, ad::Var> vars_;
};

}  // namespace tagembed
