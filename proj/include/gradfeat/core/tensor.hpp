#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/rng.hpp"

namespace gradfeat {

// Dense row-major array of 64-bit floats with shape metadata. Tensors are
// plain values: copy freely, share across threads once constructed. Every
// public operation checks shapes explicitly; there is no broadcasting.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(checked_volume(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_volume(shape_) != data_.size()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_string(shape_));
    }
  }

  static Tensor zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
  }

  static Tensor full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    for (double& v : t.data_) v = value;
    return t;
  }

  static Tensor from_vector(std::vector<double> values) {
    std::vector<std::size_t> shape{values.size()};
    return Tensor(std::move(shape), std::move(values));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::size_t dim(std::size_t axis) const {
    assert(axis < shape_.size());
    return shape_[axis];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double& operator[](std::size_t i) {
    assert(i < data_.size());
    return data_[i];
  }
  double operator[](std::size_t i) const {
    assert(i < data_.size());
    return data_[i];
  }

  // 2-D access, row-major.
  double& operator()(std::size_t r, std::size_t c) {
    assert(rank() == 2 && r < shape_[0] && c < shape_[1]);
    return data_[r * shape_[1] + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(rank() == 2 && r < shape_[0] && c < shape_[1]);
    return data_[r * shape_[1] + c];
  }

  // 3-D access (height, width, channel).
  double& operator()(std::size_t y, std::size_t x, std::size_t c) {
    assert(rank() == 3 && y < shape_[0] && x < shape_[1] && c < shape_[2]);
    return data_[(y * shape_[1] + x) * shape_[2] + c];
  }
  double operator()(std::size_t y, std::size_t x, std::size_t c) const {
    assert(rank() == 3 && y < shape_[0] && x < shape_[1] && c < shape_[2]);
    return data_[(y * shape_[1] + x) * shape_[2] + c];
  }

  Tensor reshaped(std::vector<std::size_t> new_shape) const {
    if (checked_volume(new_shape) != data_.size()) {
      throw ShapeError("cannot reshape " + shape_string(shape_) + " to " +
                       shape_string(new_shape));
    }
    return Tensor(std::move(new_shape), data_);
  }

  Tensor flattened() const { return reshaped({data_.size()}); }

  static std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) os << " x ";
      os << shape[i];
    }
    os << "]";
    return os.str();
  }

  std::string shape_string() const { return shape_string(shape_); }

 private:
  static std::size_t checked_volume(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
      if (d == 0) throw ShapeError("zero dimension in shape " + shape_string(shape));
      n *= d;
    }
    return n;
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b,
                               const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() +
                     " vs " + b.shape_string());
  }
}

inline bool all_finite(const Tensor& t) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Linear algebra. Matrices are rank-2, vectors rank-1.

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + a.shape_string() +
                     " and " + b.shape_string());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  double* od = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ad[i * k + p];
      const double* brow = bd + p * n;
      double* orow = od + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return out;
}

// A (m x n) times x (n) -> (m).
inline Tensor matvec(const Tensor& a, const Tensor& x) {
  if (a.rank() != 2 || x.rank() != 1 || a.dim(1) != x.size()) {
    throw ShapeError("matvec: incompatible shapes " + a.shape_string() +
                     " and " + x.shape_string());
  }
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out({m});
  const double* ad = a.data().data();
  const double* xd = x.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = ad + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * xd[j];
    out[i] = acc;
  }
  return out;
}

// A^T x without materializing the transpose.
inline Tensor matvec_t(const Tensor& a, const Tensor& x) {
  if (a.rank() != 2 || x.rank() != 1 || a.dim(0) != x.size()) {
    throw ShapeError("matvec_t: incompatible shapes " + a.shape_string() +
                     " and " + x.shape_string());
  }
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out({n});
  const double* ad = a.data().data();
  const double* xd = x.data().data();
  double* od = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = ad + i * n;
    const double xi = xd[i];
    for (std::size_t j = 0; j < n; ++j) od[j] += xi * row[j];
  }
  return out;
}

// u (m) outer v (n) -> (m x n).
inline Tensor outer(const Tensor& u, const Tensor& v) {
  if (u.rank() != 1 || v.rank() != 1) {
    throw ShapeError("outer: expects vectors, got " + u.shape_string() +
                     " and " + v.shape_string());
  }
  const std::size_t m = u.size(), n = v.size();
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = u[i] * v[j];
  }
  return out;
}

inline Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) {
    throw ShapeError("transpose: expects a matrix, got " + a.shape_string());
  }
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(j, i) = a(i, j);
  }
  return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a;
  for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
  return out;
}

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out = a;
  for (std::size_t i = 0; i < b.size(); ++i) out[i] *= b[i];
  return out;
}

inline Tensor scale(const Tensor& a, double s) {
  Tensor out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

// a += s * b, in place.
inline void axpy(Tensor& a, double s, const Tensor& b) {
  require_same_shape(a, b, "axpy");
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += s * b[i];
}

inline double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double l1_norm(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += std::abs(v);
  return acc;
}

inline double sq_norm(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return acc;
}

inline double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// Seeded sampling.

inline Tensor sample_gaussian(SeededRng& rng, std::vector<std::size_t> shape) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.next_gaussian();
  return t;
}

inline Tensor sample_uniform(SeededRng& rng, std::vector<std::size_t> shape,
                             double lo, double hi) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.next_uniform(lo, hi);
  return t;
}

}  // namespace gradfeat
