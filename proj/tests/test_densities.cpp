#include "isolab/densities.hpp"

#include <doctest.h>

#include <random>

using namespace isolab;

namespace {

GridDensity shifted(const ReferenceMeasure& m, double b) {
  return GridDensity::from_function(m, [b](double x) { return std::exp(b * x - 0.5 * b * b); });
}

// smooth random positive density on the grid
GridDensity random_density(const ReferenceMeasure& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a1 = u(rng), a2 = 0.5 * u(rng), f1 = 1.0 + u(rng), f2 = 2.0 + u(rng), s = 0.3 * u(rng);
  return GridDensity::from_function(
      m, [=](double x) { return std::exp(a1 * std::sin(f1 * x) + a2 * std::cos(f2 * x) + s * x); });
}

}  // namespace

TEST_CASE("relative entropy examples") {
  const auto g = ReferenceMeasure::gaussian(0, 1);
  CHECK(relative_entropy(GridDensity::uniform(g)) == doctest::Approx(0.0));
  CHECK(relative_entropy(shifted(g, 1.0)) == doctest::Approx(0.5).epsilon(1e-6));

  MeasureOptions wide;
  wide.support = std::make_pair(-12.0, 12.0);
  const auto gw = ReferenceMeasure::gaussian(0, 1, wide);
  const auto wide_var = GridDensity::from_function(gw, [](double x) { return std::exp(0.375 * x * x); });
  CHECK(relative_entropy(wide_var) == doctest::Approx((4.0 - 1.0 - std::log(4.0)) / 2.0).epsilon(1e-5));
}

TEST_CASE("fisher information examples") {
  const auto g = ReferenceMeasure::gaussian(0, 1);
  CHECK(fisher_information(GridDensity::uniform(g)).value == doctest::Approx(0.0));
  CHECK(fisher_information(shifted(g, 1.0)).value == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(fisher_information(shifted(g, 2.0)).value == doctest::Approx(4.0).epsilon(1e-4));
  CHECK_FALSE(fisher_information(shifted(g, 1.0)).unreliable);
}

TEST_CASE("renyi examples") {
  const auto g = ReferenceMeasure::gaussian(0, 1);
  CHECK(renyi_divergence(GridDensity::uniform(g), 0.3) == doctest::Approx(0.0));
  CHECK(renyi_divergence(shifted(g, 1.0), 0.5) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(renyi_divergence(shifted(g, 2.0), 0.75) == doctest::Approx(1.5).epsilon(1e-6));
  CHECK_THROWS_AS(renyi_divergence(shifted(g, 1.0), 1.0), DomainError);
  CHECK_THROWS_AS(renyi_divergence(shifted(g, 1.0), 0.0), DomainError);
}

TEST_CASE("from_function examples") {
  const auto g = ReferenceMeasure::gaussian(0, 1);
  const auto seven = GridDensity::from_function(g, [](double) { return 7.0; });
  CHECK((seven.rho().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(seven.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(GridDensity::from_function(g, [](double) { return 0.0; }), DomainError);

  // conditioning on a half-line doubles the density
  const auto half = GridDensity::from_function(g, [](double x) { return x >= 0.0 ? 1.0 : 0.0; });
  CHECK(relative_entropy(half) == doctest::Approx(std::log(2.0)).epsilon(2e-3));
  CHECK(fisher_information(half).unreliable);
}

TEST_CASE("at interpolates between nodes") {
  const auto g = ReferenceMeasure::gaussian(0, 1);
  const auto d = shifted(g, 0.5);
  CHECK(d.at(0.3) == doctest::Approx(std::exp(0.15 - 0.125)).epsilon(1e-5));
  CHECK_THROWS_AS(d.at(g.hi() + 0.1), DomainError);
}

TEST_CASE("shifted gaussian family has I/D = 2") {
  const auto g = ReferenceMeasure::gaussian(0, 1);
  for (double b = 0.25; b <= 3.0 + 1e-12; b += 0.25) {
    const auto d = shifted(g, b);
    CAPTURE(b);
    CHECK(fisher_information(d).value / relative_entropy(d) == doctest::Approx(2.0).epsilon(0.01));
  }
}

TEST_CASE("renyi is nondecreasing in order and below entropy") {
  const auto g = ReferenceMeasure::logistic(1.0);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_density(g, rng);
    const double ent = relative_entropy(d);
    double prev = 0.0;
    for (double order = 0.05; order < 1.0; order += 0.1) {
      const double r = renyi_divergence(d, order);
      CHECK(r >= prev - 1e-12);
      CHECK(r <= ent + 1e-12);
      prev = r;
    }
    CHECK(ent >= 0.0);
    CHECK(fisher_information(d).value >= 0.0);
  }
}

TEST_CASE("grid refinement changes D and I by less than 0.1 percent") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const std::uint64_t state = rng();
    MeasureOptions coarse, fine;
    fine.grid_nodes = 2 * coarse.grid_nodes;
    const auto mc = ReferenceMeasure::interp_curvature(1, 4, 1, coarse);
    const auto mf = ReferenceMeasure::interp_curvature(1, 4, 1, fine);
    std::mt19937_64 r1(state), r2(state);
    const auto dc = random_density(mc, r1), df = random_density(mf, r2);
    CHECK(relative_entropy(dc) == doctest::Approx(relative_entropy(df)).epsilon(1e-3));
    CHECK(fisher_information(dc).value == doctest::Approx(fisher_information(df).value).epsilon(1e-3));
  }
}
