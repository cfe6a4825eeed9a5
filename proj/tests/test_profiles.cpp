#include "isolab/profiles.hpp"

#include <doctest.h>

using namespace isolab;

namespace {

double phi_of_quantile(double a) {
  // Phi^{-1} by bisection on erfc, independent of the library quantile
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < a ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

ProfileCurve laplace_profile() {
  return ProfileCurve::custom(
      "laplace", [](double a) { return std::min(a, 1.0 - a); },
      [](double a) { return a < 0.5 ? 1.0 : -1.0; }, true);
}

}  // namespace

TEST_CASE("gaussian profile examples") {
  CHECK(gaussian_profile(0.5) == doctest::Approx(0.3989422804).epsilon(1e-10));
  CHECK(gaussian_profile(0.975) == doctest::Approx(0.05844507).epsilon(1e-6));
  CHECK(gaussian_profile(0.0) == 0.0);
  CHECK(gaussian_profile(1.0) == 0.0);
  const double r = log_iso_ratio(ProfileCurve::gaussian(), 1e-8);
  CHECK(r >= 0.9);
  CHECK(r <= 1.0);
  for (double a : {1e-6, 0.01, 0.2, 0.7, 0.999}) CHECK(gaussian_profile(a) == doctest::Approx(phi_of_quantile(a)).epsilon(1e-9));
}

TEST_CASE("bobkov profile examples") {
  CHECK(bobkov_profile(ReferenceMeasure::laplace_smoothed(1, 0), 0.25) == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(bobkov_profile(ReferenceMeasure::gaussian(0, 1), 0.5) == doctest::Approx(0.3989422804).epsilon(1e-9));
  CHECK(bobkov_profile(ReferenceMeasure::logistic(1), 0.3) == doctest::Approx(0.21).epsilon(1e-8));
  for (double a : {0.01, 0.1, 0.4, 0.8})
    CHECK(bobkov_profile(ReferenceMeasure::logistic(1), a) == doctest::Approx(a * (1 - a)).epsilon(1e-8));
}

TEST_CASE("bobkov profile flags non-log-concave measures") {
  std::vector<double> xs, vs;
  for (int i = -40; i <= 40; ++i) {
    const double x = 0.1 * i;
    xs.push_back(x);
    vs.push_back(0.25 * std::pow(x, 4) - x * x);
  }
  CHECK_FALSE(ProfileCurve::bobkov(ReferenceMeasure::custom(xs, vs)).extremal());
  CHECK(ProfileCurve::bobkov(ReferenceMeasure::logistic(1)).extremal());
}

TEST_CASE("profile shape: I/a nonincreasing, concave, symmetric") {
  const std::vector<ReferenceMeasure> ms{ReferenceMeasure::gaussian(0, 1), ReferenceMeasure::laplace_smoothed(1, 0.2),
                                         ReferenceMeasure::logistic(1.0), ReferenceMeasure::interp_curvature(1, 4, 1)};
  for (const auto& m : ms) {
    CAPTURE(m.family().describe());
    const ProfileCurve c = ProfileCurve::bobkov(m);
    const int n = 200;
    double prev_ratio = kInf;
    for (int k = 1; k <= n; ++k) {
      const double a = 0.5 * k / n;
      const double ratio = bobkov_profile(m, a) / a;
      CHECK(ratio <= prev_ratio * (1 + 1e-9));
      prev_ratio = ratio;
    }
    const double h = 1e-3;
    for (int k = 1; k < 100; ++k) {
      const double a = 0.01 * k;
      if (a - h <= 0.0 || a + h >= 1.0) continue;
      CHECK(c(a - h) + c(a + h) - 2.0 * c(a) <= 1e-6);
    }
    if (m.family().family != Family::interp_curvature)
      for (double a : {0.03, 0.2, 0.45}) CHECK(bobkov_profile(m, a) == doctest::Approx(bobkov_profile(m, 1 - a)).epsilon(1e-8));
  }
}

TEST_CASE("kis1_plus examples") {
  CHECK(kis1_plus(ReferenceMeasure::gaussian(0, 1)).value == doctest::Approx(1.0).epsilon(0.02));
  CHECK(kis1_plus(ReferenceMeasure::gaussian(0, 0.25)).value == doctest::Approx(4.0).epsilon(0.02));
  const KisEstimate k = kis1_plus(ReferenceMeasure::interp_curvature(1, 4, 1));
  CHECK(k.value == doctest::Approx(1.0).epsilon(0.02));
  CHECK(k.curvature_limit == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(kis1_plus(ReferenceMeasure::custom({-1, 0, 1}, {0, 0, 0})), ContractError);
}

TEST_CASE("variational product profile of two gaussians") {
  const ProfileCurve g = ProfileCurve::gaussian();
  for (double a : {0.05, 0.1, 0.25}) {
    CAPTURE(a);
    const double v = product_profile_variational(g, g, a).value;
    CHECK(v <= gaussian_profile(a) * (1 + 1e-12));
    CHECK(v >= gaussian_profile(a) * (1 - 1e-3));
  }
  CHECK(product_profile_variational(g, g, 0.1).value == doctest::Approx(0.17550).epsilon(1e-3));
}

TEST_CASE("constant curve bounds the variational value") {
  const ProfileCurve lap = laplace_profile();
  const ProfileCurve logi = ProfileCurve::bobkov(ReferenceMeasure::logistic(1));
  for (double a : {0.05, 0.3}) CHECK(product_profile_variational(lap, logi, a).value <= logi(a) * (1 + 1e-12));
}

TEST_CASE("conjecture checks") {
  const ProfileCurve lap = laplace_profile();
  const ConjectureReport r = conjecture_check(lap, lap, 0.25);
  CHECK(r.value <= 0.25 + 1e-12);
  CHECK(r.lhs_sq >= r.rhs_inf - 1e-3);
  // feasible endpoint split a2 -> 1
  CHECK(r.rhs_inf <= std::pow(lap(0.25) / 0.25, 2) + 1e-12);

  const ConjectureReport small = conjecture_check(lap, lap, 0.01, 1e-3);
  CHECK(small.holds);
  CHECK(small.a1 * small.a2 == doctest::Approx(0.01).epsilon(1e-9));
}
