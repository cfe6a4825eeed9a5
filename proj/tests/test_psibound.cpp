#include "isolab/psibound.hpp"

#include <doctest.h>

#include <random>

using namespace isolab;

namespace {

ThetaFunction random_convex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> slope(0.5, 3.0), step(0.2, 1.0);
  std::vector<double> r{0.0}, v{0.0};
  double s = slope(rng);
  for (int i = 0; i < 5; ++i) {
    const double dr = step(rng);
    r.push_back(r.back() + dr);
    v.push_back(v.back() + s * dr);
    s += slope(rng);
  }
  return ThetaFunction::piecewise_linear(r, v);
}

}  // namespace

TEST_CASE("upsilon examples") {
  const ThetaFunction lin = ThetaFunction::linear(2.0);
  CHECK(upsilon(lin, 0.0, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(upsilon(lin, 0.5, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(upsilon(lin, 1.3, 1.3) == 0.0);
  const ThetaFunction flat = ThetaFunction::piecewise_linear({0, 1, 2}, {0, 0, 1});
  CHECK(upsilon(flat, 0.0, 2.0) == kInf);
}

TEST_CASE("upsilon matches quadrature on piecewise-linear theta") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const ThetaFunction th = random_convex(rng);
    const double s = 0.3, a = 2.0;
    const double q = integrate([&](double r) { return 1.0 / std::sqrt(th(r)); }, s, a, 1e-13, 1e-12);
    CHECK(upsilon(th, s, a) == doctest::Approx(q).epsilon(1e-9));
  }
}

TEST_CASE("coupled solve examples") {
  const ThetaFunction lin = ThetaFunction::linear(2.0);
  CHECK(single_block(lin, 2.0, 1.0) == doctest::Approx(0.5).epsilon(1e-10));

  for (double tau : {0.1, 0.5, 1.0}) {
    const double alpha = 1.0;
    const CoupledSolution sol = solve_coupled(lin, 0.5, alpha, alpha, tau);
    const double expect = std::pow(std::sqrt(alpha) - std::sqrt(tau / 2), 2);
    CHECK(sol.s0 == doctest::Approx(expect).epsilon(1e-8));
    CHECK(sol.s1 == doctest::Approx(expect).epsilon(1e-8));
    CHECK_FALSE(sol.degenerate);
  }
  // budget exceeds lambda U^2(0,a1) + (1-lambda) U^2(0,a0) = 0.3*2 + 0.7*1
  const CoupledSolution deg = solve_coupled(lin, 0.3, 0.5, 1.0, 1.5);
  CHECK(deg.degenerate);
  CHECK(deg.s0 == 0.0);
  CHECK(deg.s1 == 0.0);
}

TEST_CASE("coupled solve residuals and uniqueness on random convex theta") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ul(0.1, 0.9), ua(0.5, 2.5), ut(0.01, 0.3), uu(0.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const ThetaFunction th = random_convex(rng);
    const double lambda = ul(rng), a0 = ua(rng), a1 = ua(rng), tau = ut(rng);
    const CoupledSolution sol = solve_coupled(th, lambda, a0, a1, tau);
    if (sol.degenerate) continue;
    ++solved;
    CHECK(std::abs(sol.residual_ratio) < 1e-8);
    CHECK(std::abs(sol.residual_budget) < 1e-8);
    CHECK(sol.s0 <= a0);
    CHECK(sol.s1 <= a1);
    for (int k = 0; k < 16; ++k) {
      double lo = uu(rng) * a1, hi = uu(rng) * a1;
      if (lo > hi) std::swap(lo, hi);
      const CoupledSolution again = solve_coupled(th, lambda, a0, a1, tau, std::make_pair(lo, hi));
      CHECK(again.s0 == doctest::Approx(sol.s0).epsilon(1e-7));
      CHECK(again.s1 == doctest::Approx(sol.s1).epsilon(1e-7));
    }
  }
  CHECK(solved >= 10);
}

TEST_CASE("psi upper bound examples and properties") {
  const ThetaFunction lin = ThetaFunction::linear(2.0);
  const double alpha = 1.0, tau = 0.2;
  const PsiBoundSolution p = psi_upper_bound(lin, alpha, tau);
  CHECK(p.bound >= std::pow(std::sqrt(alpha) - std::sqrt(tau / 2), 2) - 1e-10);
  CHECK(p.bound <= alpha);
  CHECK(p.lambda * p.alpha1 + (1 - p.lambda) * p.alpha0 == doctest::Approx(alpha).epsilon(1e-9));
  CHECK(p.bound == doctest::Approx(p.lambda * p.s1 + (1 - p.lambda) * p.s0).epsilon(1e-12));
  CHECK(psi_upper_bound(lin, alpha, 1e-10).bound == doctest::Approx(alpha).epsilon(1e-4));
  CHECK(psi_upper_bound(lin, 0.0, tau).bound == 0.0);

  std::mt19937_64 rng(4);
  const ThetaFunction th = random_convex(rng);
  double prev = 0.0;
  for (double a = 0.1; a <= 2.0; a += 0.3) {
    const double b = psi_upper_bound(th, a, 0.05).bound;
    CHECK(b <= a + 1e-12);
    CHECK(b >= prev - 1e-9);
    prev = b;
  }
}

TEST_CASE("xi and ldp values") {
  const ThetaFunction g = ThetaFunction::linear(2.0);
  CHECK(ldp_value(g, 0.5) == doctest::Approx(1.0));
  const XiEstimate xi = xi_estimate(g, 0.5);
  CHECK(xi.value == doctest::Approx(1.0).epsilon(0.02));
  CHECK_FALSE(xi.flagged);
  CHECK(ldp_value(ThetaFunction::linear(8.0), 0.5) == doctest::Approx(2.0));
  CHECK(ldp_value(g, 1e-12) < 1e-5);
  CHECK(xi_estimate(g, 1e-6).value < 0.01);
}
