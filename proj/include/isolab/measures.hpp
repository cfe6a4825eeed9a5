#pragma once

#include "isolab/numeric.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace isolab {

enum class Family { gaussian, laplace_smoothed, logistic, interp_curvature, custom };

std::string to_string(Family family);

/// Family label plus its parameters in declaration order:
///   gaussian(mean, variance), laplace_smoothed(scale, smoothing),
///   logistic(scale), interp_curvature(k_left, k_right, width), custom().
struct FamilyTag {
  Family family = Family::gaussian;
  std::vector<double> params;

  std::string describe() const;
};

/// V together with its first two derivatives. V may be shifted by any constant.
struct Potential {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

struct MeasureOptions {
  int grid_nodes = 4096;
  /// Explicit truncation window; otherwise the tail_mass quantiles of nu.
  std::optional<std::pair<double, double>> support;
  double tail_mass = 1e-14;
};

struct CurvatureBound {
  double value;       // inf V'' over the grid
  double resolution;  // grid spacing the infimum was taken on
};

struct LyapunovExponent {
  double value;
  /// The family has unbounded support; value reflects the truncation only.
  bool effectively_infinite;
};

/// A one-dimensional reference measure nu = exp(-V) dx restricted to a closed
/// interval. Values are immutable; copies share the tabulated data.
class ReferenceMeasure {
 public:
  static ReferenceMeasure gaussian(double mean, double variance, MeasureOptions opts = {});
  static ReferenceMeasure laplace_smoothed(double scale, double smoothing,
                                           MeasureOptions opts = {});
  static ReferenceMeasure logistic(double scale, MeasureOptions opts = {});
  /// V'' moves smoothly from k_left to k_right as Phi(x / width).
  static ReferenceMeasure interp_curvature(double k_left, double k_right, double width,
                                           MeasureOptions opts = {});
  /// Potential given as a table; V is the natural cubic spline through it and
  /// the support defaults to the table range.
  static ReferenceMeasure custom(std::vector<double> xs, std::vector<double> vs,
                                 MeasureOptions opts = {});

  /// Rebuilds a parametric family from its tag (not the custom family).
  static ReferenceMeasure from_tag(const FamilyTag& tag, MeasureOptions opts = {});

  const FamilyTag& family() const { return data_->tag; }
  bool unbounded_family() const { return data_->tag.family != Family::custom; }

  // Potential, callable anywhere V is defined (not restricted to the support).
  double potential(double x) const { return data_->potential.value(x); }
  double potential_d1(double x) const { return data_->potential.d1(x); }
  double potential_d2(double x) const { return data_->potential.d2(x); }

  double log_normalizer() const { return data_->log_z; }
  double lo() const { return data_->lo; }
  double hi() const { return data_->hi; }
  bool contains(double x) const { return x >= data_->lo && x <= data_->hi; }

  /// exp(-V(x) - log Z); throws DomainError outside the support.
  double pdf(double x) const;
  /// Same formula without the support check.
  double density(double x) const { return std::exp(-potential(x) - data_->log_z); }
  double cdf(double x) const;
  double survival(double x) const;
  /// x with cdf(x) = a, a in (0,1).
  double quantile(double a) const;
  /// x with survival(x) = q, q in (0,1); accurate for q near 0.
  double upper_quantile(double q) const;

  // Uniform grid on the support.
  Eigen::Index grid_size() const { return data_->nodes.size(); }
  double spacing() const { return data_->h; }
  const Vector& nodes() const { return data_->nodes; }
  const Vector& node_pdf() const { return data_->node_pdf; }
  /// Trapezoid weights times pdf, rescaled to sum exactly to one.
  const Vector& node_weights() const { return data_->weights; }
  /// Exact pdf at cell midpoints (size grid_size() - 1), same rescaling.
  const Vector& midpoint_pdf() const { return data_->mid_pdf; }

  bool is_log_concave() const;

 private:
  struct Data {
    FamilyTag tag;
    Potential potential;
    double lo = 0.0, hi = 0.0, h = 0.0;
    double v_ref = 0.0;
    double log_z = 0.0;
    Vector nodes, node_pdf, weights, mid_pdf;
    Vector cum_lower;  // cdf at nodes
    Vector cum_upper;  // survival at nodes, summed from the right
  };

  explicit ReferenceMeasure(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  static ReferenceMeasure build(FamilyTag tag, Potential potential, double center,
                                double scale, const MeasureOptions& opts);
  static std::shared_ptr<Data> tabulate(FamilyTag tag, Potential potential, double lo,
                                        double hi, int grid_nodes);

  std::size_t cell_of(double x) const;
  double partial_mass(std::size_t cell, double x) const;

  std::shared_ptr<const Data> data_;
};

CurvatureBound kcd_constant(const ReferenceMeasure& m);
LyapunovExponent lyapunov_exponent(const ReferenceMeasure& m, double x0);

}  // namespace isolab
