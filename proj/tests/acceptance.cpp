// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
// Tolerances and runtime limits are pinned below; nothing is read from the
// environment except ISO_LAB_THREADS through the library.

#include "isolab/constants.hpp"
#include "isolab/flow.hpp"
#include "isolab/profiles.hpp"
#include "isolab/psibound.hpp"
#include "isolab/typical.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

using namespace isolab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

template <typename F>
void criterion(int id, const char* name, double limit_s, F body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    o.pass = false;
    o.detail << " [over time limit " << limit_s << " s]";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %2d %-34s%s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.str().c_str(), secs);
  std::fflush(stdout);
}

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

ReferenceMeasure wide_gaussian() {
  MeasureOptions o;
  o.support = std::make_pair(-12.0, 12.0);
  return ReferenceMeasure::gaussian(0, 1, o);
}

GridDensity normal_start(const ReferenceMeasure& m, double b, double var) {
  Vector lr(m.grid_size());
  for (Eigen::Index i = 0; i < lr.size(); ++i) {
    const double x = m.nodes()(i);
    lr(i) = -0.5 * (x - b) * (x - b) / var + 0.5 * x * x;
  }
  return GridDensity::from_log_values(m, lr);
}

// -(1/n) ln Phi(-sqrt(n) c) from erfc
double halfspace_exact(double c, int n) {
  return -std::log(0.5 * std::erfc(std::sqrt(static_cast<double>(n)) * c / std::sqrt(2.0))) / n;
}

}  // namespace

int main() {
  criterion(1, "gaussian ldp exactness", 1.0, [](Outcome& o) {
    constexpr double kTol = 0.01;
    const double x = extrapolate_halfspace_ratio(1.0, 0.0, 10000, {1e-2, 1e-3, 1e-4});
    o.detail << "extrapolated ratio=" << x << " target=1 tol=" << kTol;
    o.require(rel(x, 1.0) < kTol, "ratio");
  });

  criterion(2, "theta for the standard gaussian", 120.0, [](Outcome& o) {
    constexpr double kTol = 0.02;
    const auto g = ReferenceMeasure::gaussian(0, 1);
    double worst = 0.0;
    for (double a : {0.1, 0.5, 1.0, 2.0}) {
      const ThetaPoint p = theta_at(g, a);
      worst = std::max(worst, rel(p.value, 2 * a));
      o.require(rel(p.value, 2 * a) < kTol, "theta(" + std::to_string(a) + ")");
      o.require(p.dual_lower <= 2 * a * (1 + kTol), "dual lower above 2 alpha");
      o.require(p.parametric_value >= 2 * a * (1 - kTol), "parametric upper below 2 alpha");
    }
    o.detail << "max rel err=" << worst << " tol=" << kTol;
  });

  criterion(3, "transport equality case", 30.0, [](Outcome& o) {
    constexpr double kPdeTol = 1e-3, kClosedTol = 1e-9;
    const auto m = wide_gaussian();
    FlowOptions opts;
    opts.t_end = 3.0;
    const FlowTrace tr = evolve(m, normal_start(m, 1, 1), opts);
    o.require(!tr.aborted, "flow aborted");
    double worst = 0.0;
    for (const auto& r : tr.records) worst = std::max(worst, std::abs(std::sqrt(2 * r.entropy) + r.w2_from_start - 1.0));
    double worst_cf = 0.0;
    for (int k = 0; k <= 3000; ++k) {
      const OuState s = ou_closed_form(1.0, 1.0, 0.001 * k);
      worst_cf = std::max(worst_cf, std::abs(std::sqrt(2 * s.entropy) + s.w2_from_start - 1.0));
    }
    o.detail << "pde dev=" << worst << " (tol " << kPdeTol << ") closed-form dev=" << worst_cf << " (tol "
             << kClosedTol << ")";
    o.require(worst < kPdeTol, "pde");
    o.require(worst_cf < kClosedTol, "closed form");
  });

  criterion(4, "entropy dissipation", 60.0, [](Outcome& o) {
    constexpr double kTol = 0.01;
    const auto m = wide_gaussian();
    FlowOptions opts;
    const double v = check_dissipation(evolve(m, normal_start(m, 1, 1), opts)).max_violation;
    opts.dt *= 0.5;
    const double v_half = check_dissipation(evolve(m, normal_start(m, 1, 1), opts)).max_violation;
    o.detail << "violation=" << v << " (tol " << kTol << ") at dt/2=" << v_half << " ratio=" << v / v_half;
    o.require(v < kTol, "violation");
    o.require(v_half <= 0.5 * v, "halving under dt/2");
  });

  criterion(5, "coupled-equation solver", 5.0, [](Outcome& o) {
    constexpr double kTol = 1e-8, kUniq = 1e-7;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0, worst_uniq = 0.0;
    for (double k : {0.5, 1.0, 4.0})
      for (double alpha : {0.5, 2.0})
        for (double tau : {0.1, 1.0}) {
          const ThetaFunction th = ThetaFunction::linear(2 * k);
          const double root = std::max(std::sqrt(alpha) - std::sqrt(k * tau / 2), 0.0);
          const double expect = root * root;
          const CoupledSolution sol = solve_coupled(th, 0.5, alpha, alpha, tau);
          worst = std::max({worst, std::abs(sol.s0 - expect), std::abs(sol.s1 - expect),
                            std::abs(single_block(th, alpha, tau) - expect)});
          if (sol.degenerate) continue;
          // asymmetric instance for the restart probe
          const double a1 = 1.3 * alpha, a0 = alpha;
          const CoupledSolution base = solve_coupled(th, 0.4, a0, a1, tau);
          if (base.degenerate) continue;
          for (int r = 0; r < 16; ++r) {
            double lo = u(rng) * a1, hi = u(rng) * a1;
            if (lo > hi) std::swap(lo, hi);
            const CoupledSolution again = solve_coupled(th, 0.4, a0, a1, tau, std::make_pair(lo, hi));
            worst_uniq = std::max({worst_uniq, std::abs(again.s0 - base.s0), std::abs(again.s1 - base.s1)});
          }
        }
    o.detail << "max abs err=" << worst << " (tol " << kTol << ") restart spread=" << worst_uniq << " (tol "
             << kUniq << ")";
    o.require(worst < kTol, "analytic solution");
    o.require(worst_uniq < kUniq, "uniqueness");
  });

  criterion(6, "bobkov profiles", 5.0, [](Outcome& o) {
    constexpr double kTol = 1e-6;
    const ProfileCurve lap = ProfileCurve::bobkov(ReferenceMeasure::laplace_smoothed(1, 0));
    const ProfileCurve logi = ProfileCurve::bobkov(ReferenceMeasure::logistic(1));
    double worst = 0.0;
    for (int k = 1; k <= 200; ++k) {
      const double a = k / 201.0;
      worst = std::max({worst, std::abs(lap(a) - std::min(a, 1 - a)), std::abs(logi(a) - a * (1 - a))});
    }
    bool shape = true;
    for (const auto& m : {ReferenceMeasure::gaussian(0, 1), ReferenceMeasure::laplace_smoothed(1, 0.2),
                          ReferenceMeasure::logistic(1), ReferenceMeasure::interp_curvature(1, 4, 1)}) {
      const ProfileCurve c = ProfileCurve::bobkov(m);
      double prev = kInf;
      for (int k = 1; k <= 200; ++k) {
        const double a = 0.5 * k / 200, ratio = c(a) / a;
        shape &= ratio <= prev * (1 + 1e-9);
        prev = ratio;
      }
      for (int k = 1; k < 200; ++k) {
        const double a = k / 200.0, h = std::min({1e-3, a / 2, (1 - a) / 2});
        shape &= c(a - h) + c(a + h) - 2 * c(a) <= 1e-6;
      }
    }
    o.detail << "max abs err=" << worst << " (tol " << kTol << ") shape=" << (shape ? "ok" : "bad");
    o.require(worst < kTol, "closed forms");
    o.require(shape, "monotone I/a and concavity");
  });

  criterion(7, "constants chain", 300.0, [](Outcome& o) {
    constexpr double kTol = 0.02;
    for (double var : {1.0, 0.25}) {
      const auto m = ReferenceMeasure::gaussian(0, var);
      const ConstantsReport r = compute_constants(m, theta_curve(m, extended_alpha_grid()));
      const double k = 1.0 / var;
      double worst = 0.0;
      for (double c : {r.k_cd, r.k_ls, r.k_ls_plus, r.k_t_upper, r.k_is1_plus}) worst = std::max(worst, rel(c, k));
      o.detail << "N(0," << var << ") worst rel=" << worst << "; ";
      o.require(worst < kTol, "gaussian constants");
      o.require(chain_audit(r, kTol).all_pass(), "gaussian audit");
    }
    const auto m = ReferenceMeasure::interp_curvature(1, 4, 1);
    const ConstantsReport r = compute_constants(m, theta_curve(m, extended_alpha_grid()));
    bool statement3 = false;
    for (const auto& c : chain_audit(r, kTol).checks)
      if (c.name == "k_ls_plus <= k_is1_plus") statement3 = c.pass;
    o.detail << "interp k_cd=" << r.k_cd << " k_is1_plus=" << r.k_is1_plus << " k_ls_plus=" << r.k_ls_plus
             << " (tol " << kTol << ")";
    o.require(rel(r.k_cd, 1.0) < kTol, "interp k_cd");
    o.require(rel(r.k_is1_plus, 1.0) < kTol, "interp k_is1_plus");
    o.require(statement3, "k_ls_plus <= k_is1_plus");
  });

  criterion(8, "xi and Lambda consistency", 30.0, [](Outcome& o) {
    constexpr double kTol = 0.02;
    ThetaOptions opts;
    opts.descent = false;
    const ThetaFunction env = theta_breve(theta_curve(ReferenceMeasure::gaussian(0, 1), default_alpha_grid(), opts));
    double worst = 0.0;
    for (double a : {0.25, 0.5, 1.0}) {
      const double lambda = ldp_value(env, a);
      worst = std::max(worst, rel(xi_estimate(env, a).value, lambda));
    }
    o.detail << "max rel gap=" << worst << " tol=" << kTol;
    o.require(worst < kTol, "xi vs Lambda");
  });

  criterion(9, "conjecture instances", 120.0, [](Outcome& o) {
    constexpr double kTol = 1e-3;
    // the gaussian gap closes only as a -> 0; 10% is the pinned band at a = 1e-6
    constexpr double kNearEquality = 0.10;
    const ProfileCurve g = ProfileCurve::gaussian();
    const ConjectureReport gg = conjecture_check(g, g, 1e-6, kTol);
    const double gap = (gg.lhs_sq - gg.rhs_inf) / gg.rhs_inf;
    const ProfileCurve lap = ProfileCurve::bobkov(ReferenceMeasure::laplace_smoothed(1, 0));
    const ConjectureReport ll = conjecture_check(lap, lap, 0.01, kTol);
    o.detail << "GxG lhs_sq=" << gg.lhs_sq << " rhs_inf=" << gg.rhs_inf << " rel gap=" << gap << " (band "
             << kNearEquality << "); LxL lhs_sq=" << ll.lhs_sq << " rhs_inf=" << ll.rhs_inf;
    o.require(gg.lhs_sq >= gg.rhs_inf - kTol, "gaussian inequality");
    o.require(gap < kNearEquality, "gaussian near equality");
    o.require(ll.holds, "laplace holds");
  });

  criterion(10, "monte carlo exponent", 120.0, [](Outcome& o) {
    constexpr double kTol = 0.05;
    constexpr int kReps = 50, kNeedCovered = 45;
    const TypicalSetSpec spec{GaussianLaw{1, 1}, ReferenceMeasure::gaussian(0, 1), 50, 0.0, true};
    const double exact = halfspace_exact(1.0, 50);
    int covered = 0;
    double worst = 0.0;
    for (int rep = 0; rep < kReps; ++rep) {
      const ExponentEstimate e = mc_measure(spec, 100000, 1000 + rep);
      worst = std::max(worst, rel(e.point, exact));
      covered += e.ci_low <= exact && exact <= e.ci_high;
    }
    o.detail << "worst rel err=" << worst << " (tol " << kTol << ") coverage=" << covered << "/" << kReps
             << " (need " << kNeedCovered << ")";
    o.require(worst < kTol, "accuracy");
    o.require(covered >= kNeedCovered, "coverage");
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
