#pragma once

#include "isolab/theta.hpp"

#include <optional>
#include <utility>

namespace isolab {

/// Upsilon(s, alpha) = int_s^alpha theta(r)^{-1/2} dr for 0 <= s <= alpha.
/// Exact for piecewise-linear theta; +inf if theta vanishes on a subinterval.
double upsilon(const ThetaFunction& theta, double s, double alpha);

struct CoupledSolution {
  double s0 = 0.0, s1 = 0.0;
  bool degenerate = false;
  double residual_ratio = 0.0;  // Upsilon(s0,a0)/sqrt(theta(s0)) - Upsilon(s1,a1)/sqrt(theta(s1))
  double residual_budget = 0.0; // lambda Upsilon^2(s1,a1) + (1-lambda) Upsilon^2(s0,a0) - tau
};

/// Solves the coupled system in (s0, s1) by nested bisection. An optional
/// starting bracket for s1 is widened toward (0, alpha1) until it changes sign.
CoupledSolution solve_coupled(const ThetaFunction& theta, double lambda, double alpha0,
                              double alpha1, double tau,
                              std::optional<std::pair<double, double>> s1_bracket = std::nullopt);

/// Largest s in [0, alpha] with Upsilon(s, alpha)^2 <= tau.
double single_block(const ThetaFunction& theta, double alpha, double tau);

struct PsiBoundSolution {
  double lambda = 1.0;
  double alpha0 = 0.0, alpha1 = 0.0;
  double s0 = 0.0, s1 = 0.0;
  double bound = 0.0;  // lambda s1 + (1 - lambda) s0
  bool degenerate = false;
};

struct PsiOptions {
  int lambda_cells = 48;  // lambda in {0.02, ..., 0.98}
  int ratio_cells = 40;
};

PsiBoundSolution psi_upper_bound(const ThetaFunction& theta, double alpha, double tau,
                                 const PsiOptions& opts = {});

struct XiEstimate {
  double value;
  std::vector<double> taus;
  std::vector<double> ratios;  // (alpha - bound)/sqrt(tau)
  double oscillation;
  bool flagged;
};

/// Extrapolates (alpha - bound(alpha, tau))/sqrt(tau) to tau -> 0 over
/// tau = 1e-2 ... 1e-6, linearly in sqrt(tau).
XiEstimate xi_estimate(const ThetaFunction& theta, double alpha, const PsiOptions& opts = {});

/// sqrt(envelope(alpha)).
double ldp_value(const ThetaFunction& envelope, double alpha);

}  // namespace isolab
