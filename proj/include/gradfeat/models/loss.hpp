#pragma once

#include <cmath>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/tensor.hpp"

namespace gradfeat {

// Per-example loss split into its reconstruction and regularization terms.
struct LossBreakdown {
  double recon = 0.0;
  double reg = 0.0;
  double total = 0.0;

  static LossBreakdown of(double recon, double reg) {
    return {recon, reg, recon + reg};
  }
};

// KL( N(mu, diag(exp(logvar))) || N(0, I) ), closed form:
//   1/2 * sum_j( mu_j^2 + exp(logvar_j) - logvar_j - 1 )
// Non-negative, zero exactly at mu = 0, logvar = 0.
inline double kl_diag_gaussian(const Tensor& mu, const Tensor& logvar) {
  require_same_shape(mu, logvar, "kl_diag_gaussian");
  double acc = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    acc += mu[j] * mu[j] + std::exp(logvar[j]) - logvar[j] - 1.0;
  }
  return 0.5 * acc;
}

}  // namespace gradfeat
