#include "isolab/measures.hpp"

#include <doctest.h>

using namespace isolab;

TEST_CASE("pdf examples") {
  const auto g = ReferenceMeasure::gaussian(0, 1);
  CHECK(g.pdf(0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
  CHECK(g.pdf(1.0) == doctest::Approx(std::exp(-0.5) / std::sqrt(2 * M_PI)).epsilon(1e-12));
  const auto lap = ReferenceMeasure::laplace_smoothed(1, 0);
  CHECK(lap.pdf(0.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS(g.pdf(g.hi() + 1.0), DomainError);
}

TEST_CASE("cdf and quantile examples") {
  const auto g = ReferenceMeasure::gaussian(0, 1);
  CHECK(std::abs(g.quantile(0.5)) < 1e-10);
  CHECK(g.cdf(1.959964) == doctest::Approx(0.5 * std::erfc(-1.959964 / std::sqrt(2.0))).epsilon(1e-10));
  const auto lap = ReferenceMeasure::laplace_smoothed(1, 0);
  CHECK(lap.quantile(0.25) == doctest::Approx(std::log(0.5)).epsilon(1e-9));
  CHECK_THROWS_AS(g.quantile(0.0), DomainError);
  CHECK_THROWS_AS(g.quantile(1.0), DomainError);
}

TEST_CASE("curvature constant") {
  CHECK(kcd_constant(ReferenceMeasure::gaussian(0, 1)).value == 1.0);
  CHECK(kcd_constant(ReferenceMeasure::gaussian(0, 4)).value == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(kcd_constant(ReferenceMeasure::interp_curvature(1, 4, 1)).value == doctest::Approx(1.0).epsilon(1e-6));
  for (double var : {0.3, 1.7, 9.0})
    CHECK(kcd_constant(ReferenceMeasure::gaussian(2, var)).value == doctest::Approx(1.0 / var).epsilon(1e-15));
}

TEST_CASE("lyapunov exponent") {
  MeasureOptions wide;
  wide.support = std::make_pair(-8.0, 8.0);
  const auto g = ReferenceMeasure::gaussian(0, 1, wide);
  const LyapunovExponent l = lyapunov_exponent(g, 0.0);
  CHECK(l.value == doctest::Approx(64.0));
  CHECK(l.effectively_infinite);

  const auto flat = ReferenceMeasure::custom({-1.0, 0.0, 1.0}, {0.0, 0.0, 0.0});
  const LyapunovExponent lf = lyapunov_exponent(flat, 0.0);
  CHECK(lf.value == doctest::Approx(1.0));
  CHECK_FALSE(lf.effectively_infinite);
  CHECK(lyapunov_exponent(flat, flat.hi()).value == doctest::Approx(4.0));
}

TEST_CASE("pdf integrates to one and quantile inverts cdf") {
  const std::vector<ReferenceMeasure> ms{
      ReferenceMeasure::gaussian(0.5, 2.0), ReferenceMeasure::laplace_smoothed(1, 0.3),
      ReferenceMeasure::logistic(1.5), ReferenceMeasure::interp_curvature(1, 4, 1)};
  for (const auto& m : ms) {
    CAPTURE(m.family().describe());
    const double total = integrate([&](double x) { return m.pdf(x); }, m.lo(), m.hi(), 1e-14, 1e-13);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m.node_weights().sum() == doctest::Approx(1.0).epsilon(1e-15));
    for (double a : {5e-7, 1e-3, 0.2, 0.5, 0.9, 1 - 5e-7}) CHECK(m.cdf(m.quantile(a)) == doctest::Approx(a).epsilon(1e-9));
    for (double x : {m.quantile(1e-6), m.quantile(0.3), m.quantile(0.999)})
      CHECK(m.quantile(m.cdf(x)) == doctest::Approx(x).epsilon(1e-8));
  }
}

TEST_CASE("log-concavity flag agrees with min V''") {
  const auto lc = ReferenceMeasure::interp_curvature(1, 4, 1);
  CHECK(lc.is_log_concave());
  CHECK(kcd_constant(lc).value >= -1e-9);
  // double well: V = x^4/4 - x^2
  std::vector<double> xs, vs;
  for (int i = -40; i <= 40; ++i) {
    const double x = 0.1 * i;
    xs.push_back(x);
    vs.push_back(0.25 * std::pow(x, 4) - x * x);
  }
  const auto well = ReferenceMeasure::custom(xs, vs);
  CHECK_FALSE(well.is_log_concave());
  CHECK(kcd_constant(well).value < 0.0);
}

TEST_CASE("support truncation sits at the tail-mass quantiles") {
  const auto g = ReferenceMeasure::gaussian(0, 1);
  CHECK(g.cdf(g.lo() + 1e-12) < 1e-13);
  CHECK(0.5 * std::erfc(-g.lo() / std::sqrt(2.0)) == doctest::Approx(1e-14).epsilon(0.05));
  CHECK(g.grid_size() == 4096);
}
