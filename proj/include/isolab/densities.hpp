#pragma once

#include "isolab/measures.hpp"

namespace isolab {

/// Relative density rho = d mu / d nu sampled on the grid of its reference
/// measure, normalized so that sum_i w_i rho_i = 1 with w = node_weights().
class GridDensity {
 public:
  /// Samples rho_fn at the nodes and normalizes. Throws DomainError if the
  /// sample is identically zero or has negative or non-finite entries.
  static GridDensity from_function(const ReferenceMeasure& m,
                                   const std::function<double(double)>& rho_fn);
  static GridDensity from_values(const ReferenceMeasure& m, Vector rho);
  /// Builds from log rho (unnormalized); -inf entries become zeros.
  static GridDensity from_log_values(const ReferenceMeasure& m, const Vector& log_rho);
  /// rho == 1, i.e. nu itself.
  static GridDensity uniform(const ReferenceMeasure& m);

  const ReferenceMeasure& measure() const { return measure_; }
  const Vector& nodes() const { return measure_.nodes(); }
  const Vector& rho() const { return rho_; }
  Eigen::Index size() const { return rho_.size(); }
  /// rho at x by linear interpolation between nodes.
  double at(double x) const;

  /// Density of mu w.r.t. Lebesgue measure at the nodes.
  Vector lebesgue_density() const;
  double mass() const { return measure_.node_weights().dot(rho_); }
  double mean() const;
  double variance() const;

  /// CDF of mu at the nodes (trapezoid rule, cached at construction).
  const Vector& cdf() const { return cdf_; }
  /// Inverse of the piecewise-quadratic CDF; u in [0,1].
  double quantile(double u) const;

 private:
  GridDensity(ReferenceMeasure m, Vector rho);

  ReferenceMeasure measure_;
  Vector rho_;
  Vector cdf_;
  Vector lebesgue_;
};

struct FisherInformation {
  double value;
  /// nu-mass of nodes where rho fell below the positivity threshold
  double masked_mass;
  bool unreliable;  // masked_mass > 1%
};

/// D(mu || nu) = int rho ln rho d nu with 0 ln 0 = 0.
double relative_entropy(const GridDensity& d);

/// I(mu || nu) = int |rho'|^2 / rho d nu with central differences; nodes with
/// rho < threshold are excluded.
FisherInformation fisher_information(const GridDensity& d, double threshold = 1e-12);

/// Renyi divergence of the given order in (0,1):
/// -(1/t) ln int rho^{1-t} d nu with t = 1 - order.
double renyi_divergence(const GridDensity& d, double order);

}  // namespace isolab
