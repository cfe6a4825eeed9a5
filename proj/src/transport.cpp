#include "isolab/transport.hpp"

namespace isolab {

namespace {

Vector u_midpoints(const QuantileGrid& grid) {
  if (grid.cells < 1 || !(grid.clip >= 0.0 && grid.clip < 0.5))
    throw DomainError("QuantileGrid: invalid configuration");
  const double du = (1.0 - 2.0 * grid.clip) / grid.cells;
  Vector u(grid.cells);
  for (int k = 0; k < grid.cells; ++k) u(k) = grid.clip + (k + 0.5) * du;
  return u;
}

}  // namespace

QuantileTable QuantileTable::of(const GridDensity& d, const QuantileGrid& grid) {
  QuantileTable t{u_midpoints(grid), Vector(grid.cells), (1.0 - 2.0 * grid.clip) / grid.cells};
  for (int k = 0; k < grid.cells; ++k) t.values(k) = d.quantile(t.probabilities(k));
  return t;
}

QuantileTable QuantileTable::of(const ReferenceMeasure& m, const QuantileGrid& grid) {
  // nu as the density rho == 1 on its own grid.
  return of(GridDensity::uniform(m), grid);
}

double wasserstein_p(const QuantileTable& a, const QuantileTable& b, double p) {
  if (!(p >= 1.0)) throw DomainError("wasserstein_p: p must be >= 1");
  if (a.values.size() != b.values.size() || a.values.size() == 0)
    throw ContractError("wasserstein_p: quantile tables on different u-grids");
  const Eigen::Index n = a.values.size();
  if (std::abs(a.step - b.step) > 1e-15)
    throw ContractError("wasserstein_p: quantile tables on different u-grids");
  const double du = a.step;
  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) total += std::pow(std::abs(a.values(k) - b.values(k)), p);
  return std::pow(total * du, 1.0 / p);
}

double conditional_wasserstein(const ConditionalPair& x, const ConditionalPair& y, double p,
                               const QuantileGrid& grid) {
  if (!(p >= 1.0)) throw DomainError("conditional_wasserstein: p must be >= 1");
  for (int w = 0; w < 2; ++w) {
    if (x.weights[w] < 0.0 || std::abs(x.weights[w] - y.weights[w]) > 1e-12)
      throw ContractError("conditional_wasserstein: conditioning weights differ");
  }
  if (std::abs(x.weights[0] + x.weights[1] - 1.0) > 1e-12)
    throw ContractError("conditional_wasserstein: weights must sum to one");
  double total = 0.0;
  for (int w = 0; w < 2; ++w) {
    if (x.weights[w] == 0.0) continue;
    total += x.weights[w] * std::pow(wasserstein_p(x.components[w], y.components[w], p, grid), p);
  }
  return std::pow(total, 1.0 / p);
}

}  // namespace isolab
