#include "isolab/densities.hpp"

#include <algorithm>

namespace isolab {

GridDensity::GridDensity(ReferenceMeasure m, Vector rho)
    : measure_(std::move(m)), rho_(std::move(rho)) {
  const Eigen::Index n = rho_.size();
  if (n != measure_.grid_size()) throw ContractError("GridDensity: size does not match grid");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(rho_(i) >= 0.0) || !std::isfinite(rho_(i)))
      throw DomainError("GridDensity: rho must be finite and nonnegative");
  const double total = mass();
  if (!(total > 0.0)) throw DomainError("GridDensity: degenerate input (zero mass)");
  rho_ /= total;

  // Lebesgue density consistent with the trapezoid weights.
  const double h = measure_.spacing();
  lebesgue_ = measure_.node_weights().cwiseProduct(rho_) / h;
  lebesgue_(0) *= 2.0;
  lebesgue_(n - 1) *= 2.0;

  cdf_.resize(n);
  cdf_(0) = 0.0;
  for (Eigen::Index j = 0; j + 1 < n; ++j)
    cdf_(j + 1) = cdf_(j) + 0.5 * h * (lebesgue_(j) + lebesgue_(j + 1));
  cdf_ /= cdf_(n - 1);
}

GridDensity GridDensity::from_function(const ReferenceMeasure& m,
                                       const std::function<double(double)>& rho_fn) {
  const Vector& x = m.nodes();
  Vector rho(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) rho(i) = rho_fn(x(i));
  return from_values(m, std::move(rho));
}

GridDensity GridDensity::from_values(const ReferenceMeasure& m, Vector rho) {
  return GridDensity(m, std::move(rho));
}

GridDensity GridDensity::from_log_values(const ReferenceMeasure& m, const Vector& log_rho) {
  const double top = log_rho.maxCoeff();
  if (!std::isfinite(top)) throw DomainError("GridDensity: log density has no finite maximum");
  Vector rho = (log_rho.array() - top).exp().matrix();
  return GridDensity(m, std::move(rho));
}

GridDensity GridDensity::uniform(const ReferenceMeasure& m) {
  return GridDensity(m, Vector::Ones(m.grid_size()));
}

Vector GridDensity::lebesgue_density() const { return lebesgue_; }

double GridDensity::at(double x) const {
  if (!measure_.contains(x)) throw DomainError("GridDensity::at: x outside support");
  const double pos = (x - measure_.lo()) / measure_.spacing();
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), rho_.size() - 2);
  const double t = pos - static_cast<double>(i);
  return (1.0 - t) * rho_(i) + t * rho_(i + 1);
}

double GridDensity::mean() const {
  return measure_.node_weights().cwiseProduct(rho_).dot(nodes());
}

double GridDensity::variance() const {
  const double mu = mean();
  const Vector centered = nodes().array() - mu;
  return measure_.node_weights().cwiseProduct(rho_).dot(centered.cwiseAbs2());
}

double GridDensity::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("GridDensity::quantile: u outside [0,1]");
  const Eigen::Index n = cdf_.size();
  const auto it = std::upper_bound(cdf_.data(), cdf_.data() + n, u);
  Eigen::Index j = static_cast<Eigen::Index>(it - cdf_.data()) - 1;
  j = std::clamp<Eigen::Index>(j, 0, n - 2);
  const double h = measure_.spacing();
  // Density is linear within the cell, so the CDF is quadratic there.
  const double scale = cdf_(j + 1) - cdf_(j);
  if (scale <= 0.0) return nodes()(j);
  const double g0 = lebesgue_(j), g1 = lebesgue_(j + 1);
  const double cell = 0.5 * h * (g0 + g1);
  const double r = (u - cdf_(j)) / scale * cell;
  const double k = (g1 - g0) / h;
  const double disc = std::max(0.0, g0 * g0 + 2.0 * k * r);
  const double denom = g0 + std::sqrt(disc);
  double s = denom > 0.0 ? 2.0 * r / denom : 0.0;
  s = std::clamp(s, 0.0, h);
  return nodes()(j) + s;
}

double relative_entropy(const GridDensity& d) {
  const Vector& w = d.measure().node_weights();
  const Vector& rho = d.rho();
  double total = 0.0;
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    if (rho(i) > 0.0) total += w(i) * rho(i) * std::log(rho(i));
  return std::max(0.0, total);
}

FisherInformation fisher_information(const GridDensity& d, double threshold) {
  const Vector& w = d.measure().node_weights();
  const Vector& r = d.rho();
  const double h = d.measure().spacing();
  const Eigen::Index n = r.size();
  double value = 0.0, masked = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i) < threshold) {
      masked += w(i);
      continue;
    }
    double grad;
    if (i == 0)
      grad = (-3.0 * r(0) + 4.0 * r(1) - r(2)) / (2.0 * h);
    else if (i == n - 1)
      grad = (3.0 * r(n - 1) - 4.0 * r(n - 2) + r(n - 3)) / (2.0 * h);
    else
      grad = (r(i + 1) - r(i - 1)) / (2.0 * h);
    value += w(i) * grad * grad / r(i);
  }
  return {value, masked, masked > 0.01};
}

double renyi_divergence(const GridDensity& d, double order) {
  if (!(order > 0.0 && order < 1.0)) throw DomainError("renyi_divergence: order must lie in (0,1)");
  const double t = 1.0 - order;
  const Vector& w = d.measure().node_weights();
  double integral = 0.0;
  for (Eigen::Index i = 0; i < d.rho().size(); ++i)
    if (d.rho()(i) > 0.0) integral += w(i) * std::pow(d.rho()(i), order);
  return std::max(0.0, -std::log(integral) / t);
}

}  // namespace isolab
