#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gfte/layers.hpp"
#include "gfte/tensor.hpp"

namespace gfte {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moments live in the training scalar type.
// Fails fast on a non-finite gradient or parameter instead of limping on.
template <typename S>
class Adam {
 public:
  Adam(const ParamSet<S>& params, AdamConfig cfg = {}) : cfg_(cfg) {
    for (const auto& [name, t] : params.entries()) {
      names_.push_back(name);
      params_.push_back(t);
      m_.push_back(ArrayX<S>::Zero(t.numel()));
      v_.push_back(ArrayX<S>::Zero(t.numel()));
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto node = params_[i].node();
      if (!params_[i].has_grad())
        throw UsageError("adam: parameter " + names_[i] + " has no gradient; run backward first");
      const ArrayX<S>& g = node->grad;
      if (!g.isFinite().all())
        throw NumericError("adam: non-finite gradient in " + names_[i] + " at step " +
                           std::to_string(t_));
      m_[i] = static_cast<S>(cfg_.beta1) * m_[i] + static_cast<S>(1.0 - cfg_.beta1) * g;
      v_[i] = static_cast<S>(cfg_.beta2) * v_[i] + static_cast<S>(1.0 - cfg_.beta2) * g * g;
      ArrayX<S> mhat = m_[i] / static_cast<S>(bc1);
      ArrayX<S> vhat = v_[i] / static_cast<S>(bc2);
      node->value -= static_cast<S>(cfg_.lr) * mhat / (vhat.sqrt() + static_cast<S>(cfg_.eps));
      if (!node->value.isFinite().all())
        throw NumericError("adam: non-finite parameter " + names_[i] + " at step " +
                           std::to_string(t_));
    }
  }

  std::int64_t steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<std::string> names_;
  std::vector<Tensor<S>> params_;
  std::vector<ArrayX<S>> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace gfte
