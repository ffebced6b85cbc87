#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/models/params.hpp"

namespace gradfeat {

enum class OptimizerKind { SgdMomentum, Adam };

inline const char* optimizer_kind_name(OptimizerKind k) {
  return k == OptimizerKind::SgdMomentum ? "sgd_momentum" : "adam";
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  // Zero is allowed and means "evaluate but never move"; useful as a
  // training-loop no-op baseline.
  double learning_rate = 1e-3;
  double momentum = 0.9;  // beta1 for Adam
  double beta2 = 0.999;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(std::isfinite(learning_rate) && learning_rate >= 0.0)) {
      throw DomainError("learning_rate must be finite and >= 0, got " +
                        std::to_string(learning_rate));
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
      throw DomainError("momentum/beta1 must lie in [0,1), got " +
                        std::to_string(momentum));
    }
    if (!(beta2 >= 0.0 && beta2 < 1.0)) {
      throw DomainError("beta2 must lie in [0,1), got " +
                        std::to_string(beta2));
    }
    if (epochs == 0) throw DomainError("epochs must be >= 1");
    if (batch_size == 0) throw DomainError("batch_size must be >= 1");
  }
};

// Stateful update rule over a fixed parameter list. Parameters are borrowed;
// the optimizer must not outlive the model.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg, std::vector<ParamRef> params)
      : cfg_(cfg), params_(std::move(params)) {
    cfg_.validate();
    slot_a_.reserve(params_.size());
    slot_b_.reserve(params_.size());
    for (const ParamRef& p : params_) {
      slot_a_.emplace_back(p.tensor->shape());
      slot_b_.emplace_back(p.tensor->shape());
    }
  }

  // One update from gradients aligned with the parameter list.
  void step(const std::vector<Tensor>& grads) {
    if (grads.size() != params_.size()) {
      throw ShapeError("optimizer step: got " + std::to_string(grads.size()) +
                       " gradients for " + std::to_string(params_.size()) +
                       " parameters");
    }
    for (std::size_t p = 0; p < params_.size(); ++p) {
      require_same_shape(*params_[p].tensor, grads[p], "optimizer step");
    }
    ++t_;
    if (cfg_.kind == OptimizerKind::Adam) {
      step_adam(grads);
    } else {
      step_sgd(grads);
    }
  }

  std::size_t steps_taken() const { return t_; }

 private:
  void step_adam(const std::vector<Tensor>& grads) {
    const double b1 = cfg_.momentum;
    const double b2 = cfg_.beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t p = 0; p < params_.size(); ++p) {
      Tensor& m = slot_a_[p];
      Tensor& v = slot_b_[p];
      Tensor& w = *params_[p].tensor;
      const Tensor& g = grads[p];
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        if (cfg_.learning_rate != 0.0) {
          const double mhat = m[i] / bias1;
          const double vhat = v[i] / bias2;
          w[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + 1e-8);
        }
      }
    }
  }

  void step_sgd(const std::vector<Tensor>& grads) {
    for (std::size_t p = 0; p < params_.size(); ++p) {
      Tensor& vel = slot_a_[p];
      Tensor& w = *params_[p].tensor;
      const Tensor& g = grads[p];
      for (std::size_t i = 0; i < w.size(); ++i) {
        vel[i] = cfg_.momentum * vel[i] - cfg_.learning_rate * g[i];
        if (cfg_.learning_rate != 0.0) w[i] += vel[i];
      }
    }
  }

  OptimizerConfig cfg_;
  std::vector<ParamRef> params_;
  std::vector<Tensor> slot_a_;  // momentum velocity / Adam first moment
  std::vector<Tensor> slot_b_;  // Adam second moment
  std::size_t t_ = 0;
};

}  // namespace gradfeat
