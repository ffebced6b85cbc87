#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/linalg.hpp"
#include "gradfeat/core/tensor.hpp"

namespace gradfeat {

// Zero-phase whitening: W = U diag(1/sqrt(s_i + eps)) U^T from the sample
// covariance. The epsilon floor keeps near-null directions from exploding
// and makes the whitened covariance only approximately identity.
struct ZcaTransform {
  Tensor mean;              // [d]
  Tensor whitening_matrix;  // [d x d], symmetric
  double epsilon = 0.1;

  std::size_t dim() const { return mean.size(); }
};

inline ZcaTransform fit_zca(const std::vector<Tensor>& patches,
                            double epsilon = 0.1) {
  if (!(epsilon > 0.0)) throw DomainError("zca epsilon must be > 0");
  if (patches.empty()) throw DomainError("zca: empty patch set");
  const std::size_t d = patches.front().size();
  for (const Tensor& p : patches) {
    if (p.rank() != 1 || p.size() != d) {
      throw ShapeError("zca: patches must all be flat length-" +
                       std::to_string(d) + ", got " + p.shape_string());
    }
  }
  const std::size_t n = patches.size();
  if (n < d + 1) {
    throw DomainError("zca: need at least " + std::to_string(d + 1) +
                      " patches for dimension " + std::to_string(d) + ", got " +
                      std::to_string(n));
  }

  Tensor mean({d});
  for (const Tensor& p : patches) axpy(mean, 1.0, p);
  for (std::size_t i = 0; i < d; ++i) mean[i] /= static_cast<double>(n);

  Tensor cov({d, d});
  Tensor centered({d});
  for (const Tensor& p : patches) {
    for (std::size_t i = 0; i < d; ++i) centered[i] = p[i] - mean[i];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centered[i];
      for (std::size_t j = i; j < d; ++j) cov(i, j) += ci * centered[j];
    }
  }
  const double norm = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov(i, j) *= norm;
      cov(j, i) = cov(i, j);
    }
  }

  const SymEig eig = sym_eig(cov);
  Tensor w({d, d});
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        acc += eig.eigenvectors(i, k) * eig.eigenvectors(j, k) /
               std::sqrt(eig.eigenvalues[k] + epsilon);
      }
      w(i, j) = acc;
      w(j, i) = acc;
    }
  }

  ZcaTransform t;
  t.mean = std::move(mean);
  t.whitening_matrix = std::move(w);
  t.epsilon = epsilon;
  return t;
}

inline Tensor apply_zca(const ZcaTransform& t, const Tensor& patch) {
  if (patch.rank() != 1 || patch.size() != t.dim()) {
    throw ShapeError("zca: expected flat length-" + std::to_string(t.dim()) +
                     " patch, got " + patch.shape_string());
  }
  return matvec(t.whitening_matrix, sub(patch, t.mean));
}

inline std::vector<Tensor> apply_zca(const ZcaTransform& t,
                                     const std::vector<Tensor>& patches) {
  std::vector<Tensor> out;
  out.reserve(patches.size());
  for (const Tensor& p : patches) out.push_back(apply_zca(t, p));
  return out;
}

}  // namespace gradfeat
