#pragma once

#include "isolab/densities.hpp"

#include <array>

namespace isolab {

struct QuantileGrid {
  int cells = 8192;
  double clip = 1e-7;  // integrate over [clip, 1 - clip]
};

/// Quantile function sampled at the midpoints of a uniform u-grid.
struct QuantileTable {
  Vector probabilities;
  Vector values;
  double step = 0.0;

  static QuantileTable of(const GridDensity& d, const QuantileGrid& grid = {});
  static QuantileTable of(const ReferenceMeasure& m, const QuantileGrid& grid = {});
};

/// (int_0^1 |F_a^{-1}(u) - F_b^{-1}(u)|^p du)^{1/p} on a shared u-grid.
double wasserstein_p(const QuantileTable& a, const QuantileTable& b, double p);

template <typename A, typename B>
double wasserstein_p(const A& a, const B& b, double p, const QuantileGrid& grid = {}) {
  if (!(p >= 1.0)) throw DomainError("wasserstein_p: p must be >= 1");
  return wasserstein_p(QuantileTable::of(a, grid), QuantileTable::of(b, grid), p);
}

/// A law on {0,1} x R given by weights (lambda_0, lambda_1) and the two
/// conditional laws.
struct ConditionalPair {
  std::array<double, 2> weights;
  std::array<GridDensity, 2> components;
};

/// (sum_w lambda_w W_p^p(x_w, y_w))^{1/p}; x and y must share weights.
double conditional_wasserstein(const ConditionalPair& x, const ConditionalPair& y, double p,
                               const QuantileGrid& grid = {});

}  // namespace isolab
