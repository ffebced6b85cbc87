#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/tensor.hpp"
#include "gradfeat/models/activations.hpp"

namespace gradfeat {

enum class OodLabel { In, Out };

// L2-regularized logistic regression on standardized features. Full-batch
// gradient descent from zero weights on a convex loss: the result depends
// only on the data, which keeps experiment tables reproducible.
struct LinearClassifier {
  Tensor weights;       // [d_f]
  double bias = 0.0;
  Tensor feature_mean;  // [d_f]
  Tensor feature_std;   // [d_f], elementwise >= 1e-8
};

namespace detail {

inline double standardized_logit(const LinearClassifier& clf,
                                 const Tensor& feature) {
  double acc = clf.bias;
  for (std::size_t i = 0; i < feature.size(); ++i) {
    acc += clf.weights[i] * (feature[i] - clf.feature_mean[i]) /
           clf.feature_std[i];
  }
  return acc;
}

}  // namespace detail

// Probability that the feature vector is out-of-distribution.
inline double decision_value(const LinearClassifier& clf,
                             const Tensor& feature) {
  if (feature.size() != clf.weights.size()) {
    throw ShapeError("classifier expects length-" +
                     std::to_string(clf.weights.size()) + " features, got " +
                     feature.shape_string());
  }
  return sigmoid(detail::standardized_logit(clf, feature));
}

inline OodLabel classify(const LinearClassifier& clf, const Tensor& feature) {
  return decision_value(clf, feature) >= 0.5 ? OodLabel::Out : OodLabel::In;
}

inline LinearClassifier train_classifier(const std::vector<Tensor>& features,
                                         const std::vector<OodLabel>& labels,
                                         std::uint64_t /*seed*/ = 0) {
  if (features.size() != labels.size()) {
    throw ShapeError("classifier training: " + std::to_string(features.size()) +
                     " features vs " + std::to_string(labels.size()) +
                     " labels");
  }
  if (features.empty()) throw DomainError("classifier training: empty set");
  const std::size_t n = features.size();
  const std::size_t d = features.front().size();
  for (const Tensor& f : features) {
    if (f.rank() != 1 || f.size() != d) {
      throw ShapeError("classifier training: inconsistent feature shape " +
                       f.shape_string());
    }
  }
  std::size_t n_out = 0;
  for (OodLabel l : labels) n_out += l == OodLabel::Out ? 1 : 0;
  if (n_out == 0 || n_out == n) {
    throw DomainError("classifier training: both classes must be present");
  }

  LinearClassifier clf;
  clf.weights = Tensor({d});
  clf.feature_mean = Tensor({d});
  clf.feature_std = Tensor({d});
  for (const Tensor& f : features) axpy(clf.feature_mean, 1.0, f);
  for (std::size_t i = 0; i < d; ++i) {
    clf.feature_mean[i] /= static_cast<double>(n);
  }
  for (const Tensor& f : features) {
    for (std::size_t i = 0; i < d; ++i) {
      const double c = f[i] - clf.feature_mean[i];
      clf.feature_std[i] += c * c;
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    clf.feature_std[i] =
        std::max(std::sqrt(clf.feature_std[i] / static_cast<double>(n)), 1e-8);
  }

  std::vector<Tensor> xs;
  xs.reserve(n);
  for (const Tensor& f : features) {
    Tensor x({d});
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = (f[i] - clf.feature_mean[i]) / clf.feature_std[i];
    }
    xs.push_back(std::move(x));
  }

  const double lambda = 1e-4;
  const double inv_n = 1.0 / static_cast<double>(n);
  // Step size 1/L from the exact curvature of the mean logistic loss,
  // L = lambda_max([X 1]^T [X 1]) / (4n) + lambda, with lambda_max found by
  // power iteration from the all-ones vector (deterministic and invariant to
  // feature permutations). The per-row bound max ||x||^2 / 4 is of order d/4
  // on standardized features and leaves wide problems far from converged
  // within the iteration budget.
  double lam_max = 0.0;
  {
    Tensor v({d});
    for (double& e : v.data()) e = 1.0;
    double vb = 1.0;
    double scale = 1.0 / std::sqrt(static_cast<double>(d) + 1.0);
    for (double& e : v.data()) e *= scale;
    vb *= scale;
    for (std::size_t it = 0; it < 64; ++it) {
      Tensor av({d});
      double avb = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        double dot = vb;
        for (std::size_t i = 0; i < d; ++i) dot += v[i] * xs[k][i];
        dot *= inv_n;
        axpy(av, dot, xs[k]);
        avb += dot;
      }
      const double norm = std::sqrt(sq_norm(av) + avb * avb);
      if (norm == 0.0) break;
      lam_max = norm;
      scale = 1.0 / norm;
      for (std::size_t i = 0; i < d; ++i) v[i] = av[i] * scale;
      vb = avb * scale;
    }
  }
  // 5% slack keeps the step below 2/L even if the iteration undershoots.
  const double lr = 1.0 / (1.05 * lam_max / 4.0 + lambda);

  Tensor grad_w({d});
  for (std::size_t iter = 0; iter < 5000; ++iter) {
    for (double& g : grad_w.data()) g = 0.0;
    double grad_b = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double u = clf.bias;
      for (std::size_t i = 0; i < d; ++i) u += clf.weights[i] * xs[k][i];
      const double p = sigmoid(u);
      const double err =
          (p - (labels[k] == OodLabel::Out ? 1.0 : 0.0)) * inv_n;
      axpy(grad_w, err, xs[k]);
      grad_b += err;
    }
    axpy(grad_w, lambda, clf.weights);
    const double gnorm = std::sqrt(sq_norm(grad_w) + grad_b * grad_b);
    if (gnorm < 1e-6) break;
    axpy(clf.weights, -lr, grad_w);
    clf.bias -= lr * grad_b;
  }
  return clf;
}

inline double evaluate_accuracy(const LinearClassifier& clf,
                                const std::vector<Tensor>& features,
                                const std::vector<OodLabel>& labels) {
  if (features.size() != labels.size()) {
    throw ShapeError("accuracy: " + std::to_string(features.size()) +
                     " features vs " + std::to_string(labels.size()) +
                     " labels");
  }
  if (features.empty()) throw DomainError("accuracy: empty evaluation set");
  std::size_t correct = 0;
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (classify(clf, features[k]) == labels[k]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(features.size());
}

}  // namespace gradfeat
