#include "isolab/typical.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace isolab;

namespace {

// -(1/n) ln P(mean of n N(0,1) >= c): erfc, or the Mills series once erfc underflows
double halfspace_oracle(double c, int n) {
  const double x = std::sqrt(static_cast<double>(n)) * c;
  if (x < 20.0) return -std::log(0.5 * std::erfc(x / std::sqrt(2.0))) / n;
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) + 105.0 / (x2 * x2 * x2 * x2);
  return (0.5 * x2 + std::log(x * std::sqrt(2.0 * M_PI)) - std::log(series)) / n;
}

TypicalSetSpec shift_spec(double b, int n, double eps, bool one_sided = true) {
  return {GaussianLaw{b, 1.0}, ReferenceMeasure::gaussian(0, 1), n, eps, one_sided};
}

}  // namespace

TEST_CASE("information density examples") {
  const auto nu = ReferenceMeasure::gaussian(0, 1);
  CHECK(info_density(GaussianLaw{1, 1}, nu, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(info_density(GaussianLaw{0, 1}, nu, 0.7) == doctest::Approx(0.0));
  CHECK(info_density(GaussianLaw{2, 1}, nu, 0.0) == doctest::Approx(-2.0).epsilon(1e-12));
  const auto half = GridDensity::from_function(nu, [](double x) { return x > 0 ? 1.0 : 0.0; });
  CHECK(info_density(half, nu, -1.0) == -kInf);
}

TEST_CASE("cramer exponent examples") {
  const auto nu = ReferenceMeasure::gaussian(0, 1);
  CHECK(cramer_exponent(GaussianLaw{1, 1}, nu, 0.0, true) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(cramer_exponent(GaussianLaw{1, 1}, nu, 0.5, true) == doctest::Approx(0.125).epsilon(1e-6));
  CHECK(cramer_exponent(GaussianLaw{0, 1}, nu, 0.1, true) == doctest::Approx(0.0));
  // two-sided with the mean of Z inside the band still pays for the nearer edge
  CHECK(cramer_exponent(GaussianLaw{1, 1}, nu, 0.5, false) == doctest::Approx(0.125).epsilon(1e-6));
}

TEST_CASE("cramer exponent at eps = 0 equals the relative entropy") {
  const auto nu = ReferenceMeasure::gaussian(0, 1);
  for (double b : {0.3, 1.0, 1.7}) CHECK(cramer_exponent(GaussianLaw{b, 1}, nu, 0.0, true) == doctest::Approx(target_entropy(GaussianLaw{b, 1}, nu)).epsilon(0.01));
  const auto logi = ReferenceMeasure::logistic(1.0);
  const auto mu = GridDensity::from_function(logi, [](double x) { return std::exp(0.8 * std::tanh(x)); });
  CHECK(cramer_exponent(mu, logi, 0.0, true) == doctest::Approx(target_entropy(mu, logi)).epsilon(0.01));
}

TEST_CASE("cgf at 0 and 1 vanishes") {
  const auto nu = ReferenceMeasure::gaussian(0, 1);
  CHECK(std::abs(information_cgf(GaussianLaw{1.3, 1}, nu, 0.0)) < 1e-10);
  CHECK(std::abs(information_cgf(GaussianLaw{1.3, 1}, nu, 1.0)) < 1e-8);
  // Gaussian shift: cgf(l) = l(l-1) b^2/2
  CHECK(information_cgf(GaussianLaw{1.3, 1}, nu, 2.0) == doctest::Approx(1.69).epsilon(1e-6));
}

TEST_CASE("monte carlo against the exact half-space tail") {
  for (int n : {10, 50, 100}) {
    CAPTURE(n);
    const TypicalSetSpec s = shift_spec(1.0, n, 0.0);
    const ExponentEstimate e = mc_measure(s, 100000, 17);
    REQUIRE(e.exact.has_value());
    CHECK(*e.exact == doctest::Approx(halfspace_oracle(1.0, n)).epsilon(1e-10));
    CHECK(std::abs(e.point - *e.exact) / *e.exact < 0.05);
    CHECK(e.ci_low <= e.point);
    CHECK(e.point <= e.ci_high);
    CHECK_FALSE(e.unreliable);
  }
  const ExponentEstimate same = mc_measure(shift_spec(0.0, 50, 0.1), 20000, 1);
  CHECK(std::abs(same.point) < 1e-3);
}

TEST_CASE("monte carlo on a grid target") {
  const auto nu = ReferenceMeasure::gaussian(0, 1);
  const auto mu = GridDensity::from_function(nu, [](double x) { return std::exp(x - 0.5); });
  const TypicalSetSpec s{mu, nu, 50, 0.0, true};
  const ExponentEstimate e = mc_measure(s, 100000, 5);
  CHECK(std::abs(e.point - halfspace_oracle(1.0, 50)) / halfspace_oracle(1.0, 50) < 0.05);
  CHECK_FALSE(e.exact.has_value());
}

TEST_CASE("monte carlo is deterministic and thread-count independent") {
  const TypicalSetSpec s = shift_spec(1.0, 20, 0.2, false);
  const ExponentEstimate a = mc_measure(s, 30000, 99);
  const ExponentEstimate b = mc_measure(s, 30000, 99);
  CHECK(a.point == b.point);
  CHECK(a.ci_low == b.ci_low);
  setenv("ISO_LAB_THREADS", "1", 1);
  const ExponentEstimate one = mc_measure(s, 30000, 99);
  setenv("ISO_LAB_THREADS", "3", 1);
  const ExponentEstimate three = mc_measure(s, 30000, 99);
  unsetenv("ISO_LAB_THREADS");
  CHECK(one.point == a.point);
  CHECK(three.point == a.point);
  CHECK(three.ci_high == a.ci_high);
  CHECK(mc_measure(s, 30000, 100).point != a.point);
}

TEST_CASE("gaussian half-space ldp") {
  const HalfspaceLdp r = gaussian_halfspace_ldp(1.0, 0.0, 10000, 0.01);
  CHECK(r.ratio == doctest::Approx(0.95).epsilon(0.01));
  CHECK(r.limit_prediction == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(r.alpha_n == doctest::Approx(halfspace_oracle(1.0, 10000)).epsilon(1e-9));

  double prev = kInf;
  for (double tau : {1e-4, 1e-3, 1e-2}) {
    const double ratio = gaussian_halfspace_ldp(1.0, 0.0, 10000, tau).ratio;
    CHECK(ratio < prev);
    prev = ratio;
  }
  CHECK(extrapolate_halfspace_ratio(1.0, 0.0, 10000, {1e-2, 1e-3, 1e-4}) == doctest::Approx(1.0).epsilon(0.01));

  // c = sqrt(tau): the enlarged set is the half-line through the mean
  const HalfspaceLdp edge = gaussian_halfspace_ldp(1.0, 0.0, 10000, 1.0);
  CHECK(edge.alpha_enlarged_n == doctest::Approx(std::log(2.0) / 10000).epsilon(1e-9));
  CHECK_THROWS(gaussian_halfspace_ldp(1.0, 0.0, 100, 1.5));
}

TEST_CASE("product typical sets") {
  const auto nu = ReferenceMeasure::gaussian(0, 1);
  const auto same = product_typical_spec(0.5, GaussianLaw{1, 1}, GaussianLaw{1, 1}, nu, 100, 0.0);
  CHECK(same.first.n == 50);
  CHECK(same.second.n == 50);
  CHECK(product_exponent(same) == doctest::Approx(0.5).epsilon(1e-6));
  const auto mixed = product_typical_spec(0.5, GaussianLaw{1, 1}, GaussianLaw{2, 1}, nu, 100, 0.0);
  CHECK(product_exponent(mixed) == doctest::Approx(1.25).epsilon(1e-6));
  const auto odd = product_typical_spec(0.3, GaussianLaw{1, 1}, GaussianLaw{2, 1}, nu, 7, 0.0);
  CHECK(odd.first.n == 2);
  CHECK(odd.second.n == 5);
  CHECK_THROWS_AS(product_typical_spec(0.005, GaussianLaw{1, 1}, GaussianLaw{1, 1}, nu, 100, 0.0), ContractError);
  CHECK_THROWS_AS(product_typical_spec(0.999, GaussianLaw{1, 1}, GaussianLaw{1, 1}, nu, 100, 0.0), ContractError);
}
