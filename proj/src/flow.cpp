#include "isolab/flow.hpp"

#include <algorithm>
#include <sstream>

namespace isolab {

namespace {

bool same_grid(const ReferenceMeasure& a, const ReferenceMeasure& b) {
  return a.grid_size() == b.grid_size() && a.lo() == b.lo() && a.hi() == b.hi();
}

}  // namespace

FlowTrace evolve(const ReferenceMeasure& m, const GridDensity& rho0, const FlowOptions& opts) {
  if (!(opts.dt > 0.0)) throw DomainError("evolve: dt must be positive");
  if (!(opts.t_end >= 0.0)) throw DomainError("evolve: t_end must be nonnegative");
  if (opts.record_every < 1) throw DomainError("evolve: record_every must be at least 1");
  if (!same_grid(m, rho0.measure())) throw ContractError("evolve: rho0 lives on another grid");

  FlowTrace trace;
  const Vector& c = m.node_weights();
  const Vector& p = m.midpoint_pdf();
  const double h = m.spacing();
  const Eigen::Index n = c.size();
  trace.rho0_out_of_range = rho0.rho().minCoeff() < 1e-6 || rho0.rho().maxCoeff() > 1e6;

  // c_i drho_i/dt = F_{i+1/2} - F_{i-1/2},  F_{j+1/2} = p_j (rho_{j+1} - rho_j) / h
  const Vector k = p / h;
  Vector s_diag = Vector::Zero(n), s_off = Vector::Zero(n);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    s_diag(j) -= k(j);
    s_diag(j + 1) -= k(j);
    s_off(j) = k(j);
  }
  auto apply_s = [&](const Vector& rho) {
    Vector out = s_diag.cwiseProduct(rho);
    out.head(n - 1) += s_off.head(n - 1).cwiseProduct(rho.tail(n - 1));
    out.tail(n - 1) += s_off.head(n - 1).cwiseProduct(rho.head(n - 1));
    return out;
  };
  // solves (C - e S) x = rhs in place
  Vector lhs_diag(n), lhs_sub(n), lhs_sup(n);
  auto implicit = [&](double e, Vector& rhs) {
    lhs_diag = c - e * s_diag;
    lhs_sub(0) = 0.0;
    lhs_sup(n - 1) = 0.0;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      lhs_sup(j) = -e * s_off(j);
      lhs_sub(j + 1) = lhs_sup(j);
    }
    solve_tridiagonal(lhs_sub, lhs_diag, lhs_sup, rhs);
  };
  // TR-BDF2: a Crank-Nicolson stage to t + g dt, then BDF2. Plain CN rings on
  // the stiff tail modes when rho0 spans many decades.
  const double g = 2.0 - std::sqrt(2.0);
  const double w_new = 1.0 / (g * (2.0 - g)), w_old = (1.0 - g) * (1.0 - g) * w_new;
  auto step = [&](const Vector& rho) {
    Vector mid = c.cwiseProduct(rho) + 0.5 * g * opts.dt * apply_s(rho);
    implicit(0.5 * g * opts.dt, mid);
    Vector next = c.cwiseProduct(w_new * mid - w_old * rho);
    implicit((1.0 - g) / (2.0 - g) * opts.dt, next);
    return next;
  };

  const QuantileTable start = QuantileTable::of(rho0, opts.quantiles);
  auto record = [&](double t, const Vector& rho) {
    const double mass = c.dot(rho);
    const GridDensity d = GridDensity::from_values(m, rho.cwiseMax(0.0));
    trace.records.push_back({t, relative_entropy(d), fisher_information(d).value,
                             wasserstein_p(start, QuantileTable::of(d, opts.quantiles), 2.0),
                             mass, d.mean(), d.variance()});
    trace.final_state = d;
  };

  Vector rho = rho0.rho();
  const auto steps = static_cast<long>(std::llround(opts.t_end / opts.dt));
  record(0.0, rho);
  for (long k = 1; k <= steps; ++k) {
    Vector rhs = step(rho);
    const double low = rhs.minCoeff();
    const double drift = std::abs(c.dot(rhs) - 1.0);
    if (low < -1e-10 || drift > 1e-6 || !rhs.allFinite()) {
      std::ostringstream why;
      why << "step " << k << ": min rho " << low << ", mass drift " << drift;
      trace.aborted = true;
      trace.abort_reason = why.str();
      if (trace.records.back().t < (k - 1) * opts.dt) record((k - 1) * opts.dt, rho);
      return trace;
    }
    rho = std::move(rhs);
    if (k % opts.record_every == 0 || k == steps) record(k * opts.dt, rho);
  }
  return trace;
}

DissipationReport check_dissipation(const FlowTrace& trace) {
  const auto& r = trace.records;
  if (r.size() < 3) throw ContractError("check_dissipation: need at least three records");
  DissipationReport rep{0.0, r.front().t};
  for (std::size_t k = 1; k + 1 < r.size(); ++k) {
    const double rate = (r[k + 1].entropy - r[k - 1].entropy) / (r[k + 1].t - r[k - 1].t);
    const double v = std::abs(rate + r[k].fisher) / std::max(r[k].fisher, 1e-6);
    if (v > rep.max_violation) rep = {v, r[k].t};
  }
  return rep;
}

TransportBoundReport check_transport_bound(const FlowTrace& trace, const ThetaFunction& theta) {
  if (trace.records.empty()) throw ContractError("check_transport_bound: empty trace");
  const double d0 = trace.records.front().entropy;
  if (!theta.convex() || !theta.satisfies_preconditions(std::max(d0, 1e-12)))
    throw ContractError("check_transport_bound: theta must be convex, nondecreasing, theta(0)=0");
  TransportBoundReport rep{kInf, true, 0.0};
  double prev_f = kInf;
  for (const FlowRecord& r : trace.records) {
    const double d = std::min(r.entropy, d0);
    const double bound = upsilon(theta, d, d0);
    rep.worst_slack = std::min(rep.worst_slack, bound - r.w2_from_start);
    const double f = r.w2_from_start + upsilon(theta, 0.0, r.entropy);
    if (std::isfinite(prev_f)) rep.max_increase = std::max(rep.max_increase, f - prev_f);
    prev_f = f;
  }
  rep.monotone_f = rep.max_increase <= 1e-4;
  return rep;
}

OuState ou_closed_form(double b, double var, double t) {
  if (!(var > 0.0)) throw DomainError("ou_closed_form: variance must be positive");
  if (!(t >= 0.0)) throw DomainError("ou_closed_form: t must be nonnegative");
  const double decay = std::exp(-t);
  const double mean = b * decay;
  const double v = 1.0 + (var - 1.0) * decay * decay;
  const double entropy = 0.5 * (v + mean * mean - 1.0 - std::log(v));
  const double fisher = (v - 1.0) * (v - 1.0) / v + mean * mean;
  const double dm = b - mean, ds = std::sqrt(var) - std::sqrt(v);
  return {mean, v, entropy, fisher, std::sqrt(dm * dm + ds * ds)};
}

}  // namespace isolab
