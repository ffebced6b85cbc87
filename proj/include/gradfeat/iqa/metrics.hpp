#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "gradfeat/core/error.hpp"

namespace gradfeat {

// Correlation and error metrics over plain double vectors. Rank metrics use
// exact half-integer rank arithmetic, so equal inputs give exactly 1.0 and a
// brute-force pair-counting implementation reproduces them bit for bit.

namespace detail {

inline void check_pair(const std::vector<double>& a,
                       const std::vector<double>& b, std::size_t min_len) {
  if (a.size() != b.size()) {
    throw ShapeError("metric inputs differ in length: " +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (a.size() < min_len) {
    throw DomainError("metric needs at least " + std::to_string(min_len) +
                      " points, got " + std::to_string(a.size()));
  }
}

// Counts inversions in-place via merge sort; v is left sorted.
inline std::uint64_t count_inversions(std::vector<double>& v,
                                      std::vector<double>& scratch,
                                      std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(v, scratch, lo, mid) +
                      count_inversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

inline std::uint64_t tie_pairs(std::uint64_t run) { return run * (run - 1) / 2; }

}  // namespace detail

// Average ranks, 1-based; tied values share the mean of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    // positions i+1 .. j+1 share rank (i + j + 2) / 2, an exact half-integer
    const double r = static_cast<double>(i + j + 2) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& a,
                      const std::vector<double>& b) {
  detail::check_pair(a, b, 2);
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xa = a[i] - ma;
    const double xb = b[i] - mb;
    num += xa * xb;
    da += xa * xa;
    db += xb * xb;
  }
  if (da == 0.0 || db == 0.0) {
    throw UndefinedCorrelationError("pearson: constant input vector");
  }
  return num / std::sqrt(da * db);
}

inline double spearman(const std::vector<double>& a,
                       const std::vector<double>& b) {
  detail::check_pair(a, b, 2);
  return pearson(average_ranks(a), average_ranks(b));
}

// Tie-adjusted tau-b. Concordant-minus-discordant is recovered from a merge
// sort: sort by (a, b), count inversions D in the b sequence, then
// C - D = n0 - n1 - n2 + n3 - 2D with the usual tie-pair counts.
inline double kendall(const std::vector<double>& a,
                      const std::vector<double>& b) {
  detail::check_pair(a, b, 2);
  const std::size_t n = a.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    if (a[x] != a[y]) return a[x] < a[y];
    return b[x] < b[y];
  });

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uint64_t n1 = 0, n2 = 0, n3 = 0;

  std::size_t i = 0;
  while (i < n) {  // ties in a, and joint ties
    std::size_t j = i;
    while (j + 1 < n && a[idx[j + 1]] == a[idx[i]]) ++j;
    n1 += detail::tie_pairs(j - i + 1);
    std::size_t p = i;
    while (p <= j) {
      std::size_t q = p;
      while (q + 1 <= j && b[idx[q + 1]] == b[idx[p]]) ++q;
      n3 += detail::tie_pairs(q - p + 1);
      p = q + 1;
    }
    i = j + 1;
  }

  std::vector<double> bs(n);
  for (std::size_t k = 0; k < n; ++k) bs[k] = b[idx[k]];
  {
    std::vector<double> sorted_b = bs;
    std::sort(sorted_b.begin(), sorted_b.end());
    std::size_t p = 0;
    while (p < n) {  // ties in b
      std::size_t q = p;
      while (q + 1 < n && sorted_b[q + 1] == sorted_b[p]) ++q;
      n2 += detail::tie_pairs(q - p + 1);
      p = q + 1;
    }
  }

  // Within an a-tied run b is already ascending, so every counted inversion
  // crosses runs and is exactly one discordant pair.
  std::vector<double> scratch(n);
  const std::uint64_t inversions = detail::count_inversions(bs, scratch, 0, n);
  const std::int64_t num = static_cast<std::int64_t>(n0) -
                           static_cast<std::int64_t>(n1) -
                           static_cast<std::int64_t>(n2) +
                           static_cast<std::int64_t>(n3) -
                           2 * static_cast<std::int64_t>(inversions);
  const std::uint64_t denom_a = n0 - n1;
  const std::uint64_t denom_b = n0 - n2;
  if (denom_a == 0 || denom_b == 0) {
    throw UndefinedCorrelationError("kendall: constant input vector");
  }
  return static_cast<double>(num) / std::sqrt(static_cast<double>(denom_a) *
                                              static_cast<double>(denom_b));
}

inline double rmse(const std::vector<double>& pred,
                   const std::vector<double>& target) {
  detail::check_pair(pred, target, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

// Fraction of predictions farther than two subjective standard deviations
// from the target, one deviation per item.
inline double outlier_ratio(const std::vector<double>& pred,
                            const std::vector<double>& target,
                            const std::vector<double>& per_item_std) {
  detail::check_pair(pred, target, 1);
  detail::check_pair(pred, per_item_std, 1);
  std::size_t outliers = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::abs(pred[i] - target[i]) > 2.0 * per_item_std[i]) ++outliers;
  }
  return static_cast<double>(outliers) / static_cast<double>(pred.size());
}

// Fallback when per-item deviations are unavailable: the global sample
// standard deviation of the targets stands in for every item.
inline double outlier_ratio(const std::vector<double>& pred,
                            const std::vector<double>& target) {
  detail::check_pair(pred, target, 2);
  double mean = 0.0;
  for (double t : target) mean += t;
  mean /= static_cast<double>(target.size());
  double var = 0.0;
  for (double t : target) var += (t - mean) * (t - mean);
  var /= static_cast<double>(target.size() - 1);
  const double sd = std::sqrt(var);
  std::vector<double> per_item(target.size(), sd);
  return outlier_ratio(pred, target, per_item);
}

}  // namespace gradfeat
