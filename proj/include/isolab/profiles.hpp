#pragma once

#include "isolab/measures.hpp"

#include <string>

namespace isolab {

enum class ProfileSource { gaussian, bobkov, variational, custom };

/// An isoperimetric profile a -> I(a) on [0,1] with its derivative.
/// I(0) = I(1) = 0.
class ProfileCurve {
 public:
  static ProfileCurve gaussian();
  /// Fast evaluator for the log-concave profile of m, tabulated in log(a)
  /// on both tails with cubic Hermite interpolation.
  static ProfileCurve bobkov(const ReferenceMeasure& m);
  static ProfileCurve custom(std::string label, std::function<double(double)> value,
                             std::function<double(double)> slope, bool symmetric = false);

  double operator()(double a) const { return value_(a); }
  double slope(double a) const { return slope_(a); }

  ProfileSource source() const { return source_; }
  const std::string& label() const { return label_; }
  /// False when the profile formula is not guaranteed extremal
  /// (bobkov profile of a measure that is not log-concave).
  bool extremal() const { return extremal_; }
  /// I(a) = I(1-a); set for the Gaussian and for symmetric reference measures.
  bool symmetric() const { return symmetric_; }

  /// Values at the given probabilities.
  Vector sample(const Vector& a) const;

 private:
  ProfileCurve(ProfileSource source, std::string label, std::function<double(double)> value,
               std::function<double(double)> slope, bool extremal, bool symmetric)
      : source_(source), label_(std::move(label)), value_(std::move(value)),
        slope_(std::move(slope)), extremal_(extremal), symmetric_(symmetric) {}

  ProfileSource source_;
  std::string label_;
  std::function<double(double)> value_;
  std::function<double(double)> slope_;
  bool extremal_ = true;
  bool symmetric_ = false;
};

/// phi(Phi^{-1}(a)), zero at a in {0, 1}.
double gaussian_profile(double a);

/// min(f(F^{-1}(a)), f(F^{-1}(1-a))) for a in (0,1).
double bobkov_profile(const ReferenceMeasure& m, double a);

/// I(a) / (a sqrt(2 ln(1/a))) for a in (0,1).
double log_iso_ratio(const ProfileCurve& curve, double a);

struct KisEstimate {
  double value;
  /// min of V'' at the two ends of the support
  double curvature_limit;
  /// spread of the last three extrapolants relative to the estimate
  double oscillation;
  bool flagged;
};

/// lim (I(a)/I_G(a))^2 as a -> 0, extrapolated linearly in 1/ln(1/a)
/// from a = 1e-4 ... 1e-12. The custom family has no curvature limits and is
/// rejected with ContractError.
KisEstimate kis1_plus(const ReferenceMeasure& m);

struct VariationalOptions {
  int cells = 512;
  int max_iter = 20000;
  /// stop when a sweep of iterations improves the value by less than this (relative)
  double rel_tol = 1e-12;
};

struct VariationalResult {
  double value;
  Vector phi;  // minimizer on the uniform t-grid
  int best_start;
  bool stalled;
};

/// inf over phi: [0,1] -> [0,1] with int phi = a of
///   int_0^1 sqrt(I2(phi)^2 + I1(t)^2 phi'^2) dt
/// over piecewise-linear phi, by projected gradient from three starts.
VariationalResult product_profile_variational(const ProfileCurve& i1, const ProfileCurve& i2,
                                              double a, const VariationalOptions& opts = {});

struct ConjectureReport {
  double value;  // variational product profile at a
  double lhs_sq;
  double rhs_inf;
  double a1, a2;
  bool holds;
  bool inconclusive;
  bool stalled;
  /// both factors symmetric log-concave; otherwise the variational value is
  /// only a lower bound on the product profile
  bool exact_reduction;
};

ConjectureReport conjecture_check(const ProfileCurve& i1, const ProfileCurve& i2, double a,
                                  double tol = 1e-3, const VariationalOptions& opts = {});

}  // namespace isolab
