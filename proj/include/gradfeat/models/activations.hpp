#pragma once

#include <algorithm>
#include <cmath>

#include "gradfeat/core/tensor.hpp"

namespace gradfeat {

// Numerically stable sigmoid, split by sign so exp never overflows.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Derivative of sigmoid expressed through its value s = sigmoid(x).
inline double sigmoid_grad_from_value(double s) { return s * (1.0 - s); }

// Inverse of sigmoid on (0, 1).
inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Bernoulli negative log-likelihood of target x under sigmoid(u), computed
// from the logit u so it stays finite for any u.
inline double bce_from_logit(double u, double x) { return softplus(u) - x * u; }

inline Tensor sigmoid(const Tensor& t) {
  Tensor out = t;
  for (double& v : out.data()) v = sigmoid(v);
  return out;
}

}  // namespace gradfeat
