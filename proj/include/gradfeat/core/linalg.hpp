#pragma once

#include <cmath>
#include <cstddef>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/tensor.hpp"

namespace gradfeat {

struct SymEig {
  Tensor eigenvalues;   // [d], ascending
  Tensor eigenvectors;  // [d x d], column k pairs with eigenvalue k
};

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Plenty for the covariance sizes this library sees (d of a few hundred).
inline SymEig sym_eig(const Tensor& matrix, double tol = 1e-12,
                      int max_sweeps = 64) {
  if (matrix.rank() != 2 || matrix.dim(0) != matrix.dim(1)) {
    throw ShapeError("sym_eig: expects a square matrix, got " +
                     matrix.shape_string());
  }
  const std::size_t d = matrix.dim(0);
  Tensor a = matrix;
  Tensor v({d, d});
  for (std::size_t i = 0; i < d; ++i) v(i, i) = 1.0;

  double scale = max_abs(a);
  if (scale == 0.0) scale = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off = std::max(off, std::abs(a(p, q)));
    }
    if (off <= tol * scale) break;

    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= tol * scale * 1e-3) continue;
        const double app = a(p, p), aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        // Stable tangent of the rotation angle.
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                             : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  // Sort ascending by eigenvalue, permuting eigenvector columns to match.
  Tensor values({d});
  for (std::size_t i = 0; i < d; ++i) values[i] = a(i, i);
  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });

  SymEig out{Tensor({d}), Tensor({d, d})};
  for (std::size_t k = 0; k < d; ++k) {
    out.eigenvalues[k] = values[order[k]];
    for (std::size_t i = 0; i < d; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace gradfeat
