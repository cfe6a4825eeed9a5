#pragma once

#include "isolab/densities.hpp"

#include <optional>
#include <string>
#include <vector>

namespace isolab {

/// A rate function theta on [0, inf) with theta(0) = 0. When built from knots
/// it is piecewise linear, extended past the last knot with the final slope.
class ThetaFunction {
 public:
  /// theta(r) = slope * r
  static ThetaFunction linear(double slope);
  /// Knots must start at (0, 0) with r strictly increasing.
  static ThetaFunction piecewise_linear(std::vector<double> r, std::vector<double> value);
  static ThetaFunction from_function(std::function<double(double)> f, bool convex);

  double operator()(double r) const;

  bool convex() const { return convex_; }
  bool zero_at_zero() const { return zero_at_zero_; }
  bool piecewise() const { return !knots_r_.empty(); }
  const std::vector<double>& knots_r() const { return knots_r_; }
  const std::vector<double>& knots_value() const { return knots_v_; }
  /// Past this point values come from the linear extension.
  double extrapolated_beyond() const { return extrapolated_beyond_; }

  /// theta(0) = 0, nondecreasing and (if flagged) midpoint convex on a grid of
  /// `samples` points over [0, r_max].
  bool satisfies_preconditions(double r_max, int samples = 256, double tol = 1e-9) const;

 private:
  std::function<double(double)> eval_;
  std::vector<double> knots_r_, knots_v_;
  bool convex_ = true;
  bool zero_at_zero_ = true;
  double extrapolated_beyond_ = kInf;
};

/// How a test density was produced, enough to rebuild it on the same grid.
struct Certificate {
  enum class Kind { gaussian, pushforward, grid };
  Kind kind = Kind::gaussian;
  /// gaussian: (mean, sd); pushforward: (shift, scale) of nu
  std::vector<double> params;
  double entropy = 0.0;
  double fisher = 0.0;
  std::optional<Vector> rho;  // grid snapshot for Kind::grid

  std::string tag() const;
};

struct ThetaOptions {
  bool descent = true;
  int stages = 5;
  int iterations_per_stage = 400;
  double initial_penalty = 100.0;
  int scale_grid = 25;
};

struct ThetaPoint {
  double alpha;
  double value;               // smallest Fisher information found with D >= alpha
  double parametric_value;    // best over the location-scale families
  double dual_lower;          // 2 max(K_CD, 0) alpha
  Certificate certificate;
  bool descent_failed = false;
};

ThetaPoint theta_at(const ReferenceMeasure& m, double alpha, const ThetaOptions& opts = {});

struct EnvelopeNode {
  double alpha;
  double value;
};

struct ThetaCurve {
  std::vector<double> alphas;
  std::vector<double> theta_vals;
  std::vector<double> dual_lower;
  std::vector<Certificate> certificates;
  std::vector<EnvelopeNode> envelope;  // hull nodes, starting at (0, 0)
  bool any_descent_failed = false;

  /// Evaluates the envelope (linear past the last node).
  double envelope_at(double alpha) const;
};

const std::vector<double>& default_alpha_grid();
/// Default grid plus two far points, for estimating limits as alpha grows.
const std::vector<double>& extended_alpha_grid();

ThetaCurve theta_curve(const ReferenceMeasure& m, const std::vector<double>& alphas,
                       const ThetaOptions& opts = {});

/// Lower convex hull of {(0,0)} and the given points (monotone chain).
std::vector<EnvelopeNode> lower_convex_hull(std::vector<EnvelopeNode> points);

/// Convex envelope of the curve as a piecewise-linear rate function.
ThetaFunction theta_breve(const ThetaCurve& curve);

struct TensorizationReport {
  double beta;
  double product_bound;  // best (I1 + I2)/2 over splits with (D1 + D2)/2 >= beta
  double envelope_val;
  double split_low, split_high;  // the two alpha levels of the best split
  bool holds;  // product_bound >= envelope_val - tol
  bool tight;  // within 5% of the envelope
  bool skipped = false;
};

/// Entropy and Fisher information achieved by some test density at level alpha.
struct LevelSample {
  double entropy;
  double fisher;
};

/// Two-factor product test densities built from levels alpha and
/// 2 beta - alpha for every curve point alpha <= beta.
TensorizationReport tensorization_check(const ThetaCurve& curve, double beta,
                                        const std::function<LevelSample(double)>& level,
                                        double tol = 1e-3);
TensorizationReport tensorization_check(const ReferenceMeasure& m, const ThetaCurve& curve,
                                        double beta, const ThetaOptions& opts = {},
                                        double tol = 1e-3);

}  // namespace isolab
