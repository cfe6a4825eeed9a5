#include "isolab/psibound.hpp"

#include <algorithm>
#include <sstream>

namespace isolab {

namespace {

// int_x0^x1 dr / sqrt(theta) where theta is linear between the end values.
double linear_piece(double x0, double x1, double t0, double t1) {
  if (x1 <= x0) return 0.0;
  const double denom = std::sqrt(std::max(t0, 0.0)) + std::sqrt(std::max(t1, 0.0));
  if (!(denom > 0.0)) return kInf;
  return 2.0 * (x1 - x0) / denom;
}

double upsilon_piecewise(const ThetaFunction& theta, double s, double alpha) {
  const auto& r = theta.knots_r();
  double total = 0.0;
  double x = s;
  std::size_t k = static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), s) - r.begin());
  while (x < alpha) {
    const double end = k < r.size() ? std::min(r[k], alpha) : alpha;
    total += linear_piece(x, end, theta(x), theta(end));
    if (!std::isfinite(total)) return kInf;
    x = end;
    ++k;
  }
  return total;
}

}  // namespace

double upsilon(const ThetaFunction& theta, double s, double alpha) {
  if (!(s >= 0.0 && s <= alpha)) throw DomainError("upsilon: need 0 <= s <= alpha");
  if (s == alpha) return 0.0;
  if (theta.piecewise()) return upsilon_piecewise(theta, s, alpha);

  // theta(r) ~ c r near zero integrates to 2 sqrt(r / c)
  const double delta = 1e-8 * alpha;
  double head = 0.0;
  double from = s;
  if (s < delta) {
    const double c = theta(delta) / delta;
    if (!(c > 0.0)) return kInf;
    head = 2.0 * (std::sqrt(delta) - std::sqrt(s)) / std::sqrt(c);
    from = delta;
  }
  bool vanished = false;
  const double body = integrate(
      [&](double r) {
        const double t = theta(r);
        if (!(t > 0.0)) {
          vanished = true;
          return 0.0;
        }
        return 1.0 / std::sqrt(t);
      },
      from, alpha, 1e-13, 1e-11);
  if (vanished) return kInf;
  return head + body;
}

double single_block(const ThetaFunction& theta, double alpha, double tau) {
  if (!(alpha >= 0.0) || !(tau >= 0.0)) throw DomainError("single_block: need alpha, tau >= 0");
  if (alpha == 0.0) return 0.0;
  const double target = std::sqrt(tau);
  if (upsilon(theta, 0.0, alpha) <= target) return 0.0;
  return bracketed_root([&](double x) { return upsilon(theta, x, alpha) - target; }, 0.0, alpha,
                        1e-15 * alpha);
}

namespace {

class CoupledSystem {
 public:
  CoupledSystem(const ThetaFunction& theta, double lambda, double a0, double a1, double tau)
      : theta_(theta), lambda_(lambda), a0_(a0), a1_(a1), tau_(tau) {}

  double ratio(double s, double alpha) const {
    if (s >= alpha) return 0.0;
    const double t = theta_(s);
    if (!(t > 0.0)) return kInf;
    return upsilon(theta_, s, alpha) / std::sqrt(t);
  }

  // s0 with ratio(s0, a0) = ratio(s1, a1); ratio(., a0) decreases from +inf to 0.
  double inner(double s1) const {
    const double target = ratio(s1, a1_);
    if (target <= 0.0) return a0_;
    if (!std::isfinite(target)) return 0.0;
    return bracketed_root([&](double s) { return ratio(s, a0_) - target; }, 0.0, a0_,
                          1e-15 * a0_);
  }

  double budget(double s1, double s0) const {
    const double u1 = upsilon(theta_, s1, a1_), u0 = upsilon(theta_, s0, a0_);
    return lambda_ * u1 * u1 + (1.0 - lambda_) * u0 * u0 - tau_;
  }

  double outer(double s1) const { return budget(s1, inner(s1)); }

 private:
  const ThetaFunction& theta_;
  double lambda_, a0_, a1_, tau_;
};

}  // namespace

CoupledSolution solve_coupled(const ThetaFunction& theta, double lambda, double alpha0,
                              double alpha1, double tau,
                              std::optional<std::pair<double, double>> s1_bracket) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("solve_coupled: lambda must lie in (0,1)");
  if (!(alpha0 > 0.0 && alpha1 > 0.0)) throw DomainError("solve_coupled: alphas must be positive");
  if (!(tau > 0.0)) throw DomainError("solve_coupled: tau must be positive");
  if (!theta.zero_at_zero()) throw ContractError("solve_coupled: theta(0) must vanish");

  const double u1 = upsilon(theta, 0.0, alpha1), u0 = upsilon(theta, 0.0, alpha0);
  if (lambda * u1 * u1 + (1.0 - lambda) * u0 * u0 <= tau) {
    CoupledSolution degenerate;
    degenerate.degenerate = true;
    degenerate.residual_budget = lambda * u1 * u1 + (1.0 - lambda) * u0 * u0 - tau;
    return degenerate;
  }

  const CoupledSystem sys(theta, lambda, alpha0, alpha1, tau);
  double lo = 0.0, hi = alpha1;  // outer(lo) > 0 > outer(hi)
  if (s1_bracket) {
    lo = std::clamp(s1_bracket->first, 0.0, alpha1);
    hi = std::clamp(s1_bracket->second, lo, alpha1);
    int widen = 0;
    while (lo > 0.0 && sys.outer(lo) <= 0.0) {
      lo *= 0.5;
      if (++widen > 200) lo = 0.0;
    }
    widen = 0;
    while (hi < alpha1 && sys.outer(hi) >= 0.0) {
      hi = 0.5 * (hi + alpha1);
      if (++widen > 200) hi = alpha1;
    }
  }
  if (sys.outer(hi) > 0.0) {
    std::ostringstream msg;
    msg << "solve_coupled: no sign change on s1 in [" << lo << ", " << hi
        << "]; theta may not be convex and nondecreasing";
    throw ContractError(msg.str());
  }
  CoupledSolution sol;
  sol.s1 = bracketed_root([&](double s1) { return sys.outer(s1); }, lo, hi, 1e-15 * alpha1);
  sol.s0 = sys.inner(sol.s1);
  sol.residual_ratio = sys.ratio(sol.s0, alpha0) - sys.ratio(sol.s1, alpha1);
  sol.residual_budget = sys.budget(sol.s1, sol.s0);
  return sol;
}

namespace {

// lambda s1 + (1 - lambda) s0 at alpha1 = ratio * alpha.
PsiBoundSolution evaluate_split(const ThetaFunction& theta, double alpha, double tau,
                                double lambda, double ratio) {
  PsiBoundSolution out;
  out.lambda = lambda;
  out.alpha1 = alpha * ratio;
  out.alpha0 = (alpha - lambda * out.alpha1) / (1.0 - lambda);
  if (!(out.alpha0 > 0.0) || !(out.alpha1 > 0.0)) {
    out.bound = -kInf;
    return out;
  }
  const CoupledSolution sol = solve_coupled(theta, lambda, out.alpha0, out.alpha1, tau);
  out.s0 = sol.s0;
  out.s1 = sol.s1;
  out.degenerate = sol.degenerate;
  out.bound = lambda * sol.s1 + (1.0 - lambda) * sol.s0;
  return out;
}

}  // namespace

PsiBoundSolution psi_upper_bound(const ThetaFunction& theta, double alpha, double tau,
                                 const PsiOptions& opts) {
  if (!(alpha >= 0.0)) throw DomainError("psi_upper_bound: alpha must be nonnegative");
  if (!(tau > 0.0)) throw DomainError("psi_upper_bound: tau must be positive");
  PsiBoundSolution best;
  best.lambda = 1.0;
  best.alpha1 = alpha;
  if (alpha == 0.0) {
    best.degenerate = true;
    return best;
  }
  // lambda in {0, 1} collapses to one block at level alpha
  best.s1 = single_block(theta, alpha, tau);
  best.bound = best.s1;
  best.degenerate = best.s1 == 0.0;

  const int nl = std::max(2, opts.lambda_cells), nr = std::max(2, opts.ratio_cells);
  std::vector<PsiBoundSolution> rows(static_cast<std::size_t>(nl + 1));
  std::vector<double> row_ratio(rows.size(), 1.0);
  parallel_for(rows.size(), [&](std::size_t k) {
    const double lambda = 0.02 + 0.96 * static_cast<double>(k) / nl;
    PsiBoundSolution row;
    row.bound = -kInf;
    double arg = 1.0;
    std::vector<double> ratios{1.0};
    for (int j = 1; j < nr; ++j) ratios.push_back(static_cast<double>(j) / nr / lambda);
    for (double r : ratios) {
      const PsiBoundSolution s = evaluate_split(theta, alpha, tau, lambda, r);
      if (s.bound > row.bound) {
        row = s;
        arg = r;
      }
    }
    rows[k] = row;
    row_ratio[k] = arg;
  });

  std::size_t arg = 0;
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k].bound > rows[arg].bound) arg = k;
  PsiBoundSolution grid_best = rows[arg];
  double lambda = grid_best.lambda, ratio = row_ratio[arg];

  // refine the ratio, then lambda
  const double dr = 1.0 / nr / lambda;
  auto neg_at_ratio = [&](double r) { return -evaluate_split(theta, alpha, tau, lambda, r).bound; };
  const ScalarOptimum r_opt = golden_minimize(neg_at_ratio, std::max(dr * 0.5, ratio - dr),
                                              std::min(1.0 / lambda - dr * 0.5, ratio + dr), 1e-10);
  PsiBoundSolution cand = evaluate_split(theta, alpha, tau, lambda, r_opt.x);
  if (cand.bound > grid_best.bound) {
    grid_best = cand;
    ratio = r_opt.x;
  }
  const double dl = 0.96 / nl;
  auto neg_at_lambda = [&](double l) { return -evaluate_split(theta, alpha, tau, l, ratio).bound; };
  const double l_hi = std::min({0.99, lambda + dl, 1.0 / ratio * (1.0 - 1e-12)});
  const double l_lo = std::max(0.01, lambda - dl);
  if (l_hi > l_lo) {
    const ScalarOptimum l_opt = golden_minimize(neg_at_lambda, l_lo, l_hi, 1e-10);
    cand = evaluate_split(theta, alpha, tau, l_opt.x, ratio);
    if (cand.bound > grid_best.bound) grid_best = cand;
  }

  if (grid_best.bound > best.bound) best = grid_best;
  best.bound = std::min(best.bound, alpha);
  return best;
}

XiEstimate xi_estimate(const ThetaFunction& theta, double alpha, const PsiOptions& opts) {
  if (!(alpha > 0.0)) throw DomainError("xi_estimate: alpha must be positive");
  XiEstimate out{};
  std::vector<double> h;
  for (int k = 2; k <= 6; ++k) {
    const double tau = std::pow(10.0, -k);
    const PsiBoundSolution sol = psi_upper_bound(theta, alpha, tau, opts);
    out.taus.push_back(tau);
    out.ratios.push_back((alpha - sol.bound) / std::sqrt(tau));
    h.push_back(std::sqrt(tau));
  }
  std::vector<double> extrapolants;
  for (std::size_t i = 0; i + 1 < h.size(); ++i)
    extrapolants.push_back(richardson_linear(h[i], out.ratios[i], h[i + 1], out.ratios[i + 1]));
  out.value = extrapolants.back();
  const auto [lo, hi] = std::minmax_element(extrapolants.end() - 3, extrapolants.end());
  out.oscillation = (*hi - *lo) / std::max(std::abs(out.value), 1e-300);
  out.flagged = out.oscillation > 0.05;
  return out;
}

double ldp_value(const ThetaFunction& envelope, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("ldp_value: alpha must be nonnegative");
  return std::sqrt(envelope(alpha));
}

}  // namespace isolab
