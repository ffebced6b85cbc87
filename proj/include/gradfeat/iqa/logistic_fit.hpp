#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gradfeat/core/error.hpp"
#include "gradfeat/core/rng.hpp"

namespace gradfeat {

// Monotonic 4-parameter logistic q -> a + (b-a) / (1 + exp(-(q-c)/d)),
// fitted by least squares to map objective scores onto subjective scores.
// If no logistic beats a straight line, the fit degrades to that line and
// says so via affine_fallback.
struct LogisticFit {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
  double d = 1.0;
  bool affine_fallback = false;
  double affine_slope = 0.0;
  double affine_intercept = 0.0;
  double residual = 0.0;  // sum of squared errors of apply() on the fit set

  double apply(double q) const {
    if (affine_fallback) return affine_intercept + affine_slope * q;
    return a + (b - a) / (1.0 + std::exp(-(q - c) / d));
  }
};

namespace detail {

struct LogisticParams {
  double a, b, c, d;
};

inline double logistic_sse(const LogisticParams& p,
                           const std::vector<double>& q,
                           const std::vector<double>& y) {
  double sse = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double t = (q[i] - p.c) / p.d;
    const double s = 1.0 / (1.0 + std::exp(-t));
    const double r = p.a + (p.b - p.a) * s - y[i];
    sse += r * r;
  }
  return sse;
}

// Adam on the four parameters; returns the best iterate, not the last.
inline LogisticParams polish(LogisticParams p, const std::vector<double>& q,
                             const std::vector<double>& y, std::size_t iters,
                             double lr) {
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double m[4] = {0, 0, 0, 0};
  double v[4] = {0, 0, 0, 0};
  LogisticParams best = p;
  double best_sse = logistic_sse(p, q, y);
  for (std::size_t it = 1; it <= iters; ++it) {
    double g[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double t = (q[i] - p.c) / p.d;
      const double s = 1.0 / (1.0 + std::exp(-t));
      const double f = p.a + (p.b - p.a) * s;
      const double r2 = 2.0 * (f - y[i]);
      const double sp = s * (1.0 - s) * (p.b - p.a);
      g[0] += r2 * (1.0 - s);
      g[1] += r2 * s;
      g[2] += r2 * (-sp / p.d);
      g[3] += r2 * (-sp * t / p.d);
    }
    double* fields[4] = {&p.a, &p.b, &p.c, &p.d};
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(it));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(it));
    for (int k = 0; k < 4; ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      *fields[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
    if (p.d == 0.0 || !std::isfinite(p.d)) break;
    const double sse = logistic_sse(p, q, y);
    if (std::isfinite(sse) && sse < best_sse) {
      best_sse = sse;
      best = p;
    }
  }
  return best;
}

}  // namespace detail

inline LogisticFit logistic_fit(const std::vector<double>& objective,
                                const std::vector<double>& subjective,
                                std::uint64_t seed = 0) {
  if (objective.size() != subjective.size()) {
    throw ShapeError("logistic fit: length mismatch " +
                     std::to_string(objective.size()) + " vs " +
                     std::to_string(subjective.size()));
  }
  const std::size_t n = objective.size();
  if (n < 5) throw DomainError("logistic fit: need at least 5 points");
  const auto [qmin_it, qmax_it] =
      std::minmax_element(objective.begin(), objective.end());
  if (*qmin_it == *qmax_it) {
    throw DomainError("logistic fit: constant objective scores");
  }

  // Standardize both axes for optimization, map parameters back afterwards.
  double mq = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mq += objective[i];
    my += subjective[i];
  }
  mq /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double vq = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vq += (objective[i] - mq) * (objective[i] - mq);
    vy += (subjective[i] - my) * (subjective[i] - my);
  }
  const double sq = std::sqrt(vq / static_cast<double>(n));
  const double sy = std::max(std::sqrt(vy / static_cast<double>(n)), 1e-12);
  std::vector<double> qs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    qs[i] = (objective[i] - mq) / sq;
    ys[i] = (subjective[i] - my) / sy;
  }

  // Best affine fit, the quality floor for the logistic.
  double sqy = 0.0, sqq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sqy += qs[i] * ys[i];
    sqq += qs[i] * qs[i];
  }
  const double k_std = sqy / sqq;  // affine fit through standardized origin
  double affine_sse_std = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = k_std * qs[i] - ys[i];
    affine_sse_std += r * r;
  }

  const auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.end());
  const double ylo = *ymin_it, yhi = *ymax_it;

  std::vector<detail::LogisticParams> starts;
  starts.push_back({ylo, yhi, 0.0, 1.0});
  starts.push_back({yhi, ylo, 0.0, 1.0});
  starts.push_back({ylo - 0.5, yhi + 0.5, 0.0, 0.5});
  // Near-affine start: for |t| small the logistic is ~ mid + span*t/4.
  {
    const double d0 = 8.0;
    starts.push_back({-2.0 * d0 * k_std, 2.0 * d0 * k_std, 0.0, d0});
  }
  SeededRng rng(seed);
  for (int i = 0; i < 4; ++i) {
    starts.push_back({ylo + rng.next_uniform(-0.5, 0.5),
                      yhi + rng.next_uniform(-0.5, 0.5),
                      rng.next_uniform(-1.0, 1.0),
                      rng.next_uniform(0.2, 2.0)});
  }

  detail::LogisticParams best{};
  double best_sse = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    detail::LogisticParams p = detail::polish(s, qs, ys, 4000, 0.03);
    p = detail::polish(p, qs, ys, 2000, 0.003);
    const double sse = detail::logistic_sse(p, qs, ys);
    if (std::isfinite(sse) && sse < best_sse && p.d != 0.0) {
      best_sse = sse;
      best = p;
    }
  }

  const double slope_raw = k_std * sy / sq;
  const double intercept_raw = my - slope_raw * mq;
  double affine_sse_raw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = intercept_raw + slope_raw * objective[i] - subjective[i];
    affine_sse_raw += r * r;
  }

  const auto raw_sse = [&](const LogisticFit& f) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = f.apply(objective[i]) - subjective[i];
      sse += r * r;
    }
    return sse;
  };

  LogisticFit fit;
  fit.affine_slope = slope_raw;
  fit.affine_intercept = intercept_raw;
  if (best_sse <= affine_sse_std) {
    if (best.d < 0.0) {  // same curve with d > 0
      std::swap(best.a, best.b);
      best.d = -best.d;
    }
    fit.a = my + sy * best.a;
    fit.b = my + sy * best.b;
    fit.c = mq + sq * best.c;
    fit.d = sq * best.d;
    fit.residual = raw_sse(fit);
    // Standardization rounding must never leave the curve behind the line.
    if (fit.residual > affine_sse_raw) fit.affine_fallback = true;
  } else {
    fit.affine_fallback = true;
  }
  if (fit.affine_fallback) fit.residual = raw_sse(fit);
  return fit;
}

}  // namespace gradfeat
