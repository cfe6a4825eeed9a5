#include "isolab/constants.hpp"

#include "isolab/profiles.hpp"
#include "isolab/transport.hpp"

#include <algorithm>
#include <sstream>

namespace isolab {

double transport_ratio(const GridDensity& d) {
  const QuantileGrid grid{};
  const double w2 = wasserstein_p(QuantileTable::of(d, grid),
                                  QuantileTable::of(d.measure(), grid), 2.0);
  if (!(w2 > 0.0)) return kInf;
  return 2.0 * relative_entropy(d) / (w2 * w2);
}

namespace {

// Gaussian and pushforward test densities at a handful of offsets.
std::pair<double, std::string> transport_upper(const ReferenceMeasure& m) {
  const GridDensity base = GridDensity::uniform(m);
  const double mean = base.mean(), sd = std::sqrt(base.variance());
  struct Probe {
    bool gaussian;
    double shift, scale;
  };
  std::vector<Probe> probes;
  for (double b : {-1.0, -0.5, -0.25, 0.25, 0.5, 1.0})
    for (double s : {0.8, 1.0, 1.25}) {
      probes.push_back({true, b, s});
      probes.push_back({false, b, s});
    }
  std::vector<double> ratio(probes.size(), kInf);
  parallel_for(probes.size(), [&](std::size_t k) {
    const Probe& p = probes[k];
    const Vector& x = m.nodes();
    Vector log_rho(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (p.gaussian) {
        const double z = (x(i) - mean - p.shift * sd) / (p.scale * sd);
        log_rho(i) = -0.5 * z * z + m.potential(x(i));
      } else {
        log_rho(i) = -m.potential((x(i) - p.shift * sd) / p.scale) + m.potential(x(i));
      }
    }
    ratio[k] = transport_ratio(GridDensity::from_log_values(m, log_rho));
  });
  const auto best = static_cast<std::size_t>(std::min_element(ratio.begin(), ratio.end()) - ratio.begin());
  std::ostringstream tag;
  tag << (probes[best].gaussian ? "gaussian" : "pushforward") << "(shift=" << probes[best].shift
      << "sd, scale=" << probes[best].scale << ")";
  return {ratio[best], tag.str()};
}

}  // namespace

ConstantsReport compute_constants(const ReferenceMeasure& m, const ThetaCurve& curve) {
  if (curve.envelope.size() < 2) throw ContractError("compute_constants: envelope has no segments");
  ConstantsReport r;
  r.k_cd = kcd_constant(m).value;
  r.provenance["k_cd"] = "inf of V'' over the grid";

  const auto& env = curve.envelope;
  const double first_slope = (env[1].value - env[0].value) / (env[1].alpha - env[0].alpha);
  r.k_ls = 0.5 * first_slope;
  r.k_ls_bracket = {std::max(r.k_cd, 0.0), r.k_ls};
  r.provenance["k_ls"] = "half the first envelope slope (theta values are upper bounds)";

  const std::size_t last = env.size() - 1;
  const double last_slope =
      (env[last].value - env[last - 1].value) / (env[last].alpha - env[last - 1].alpha);
  r.k_ls_plus = 0.5 * last_slope;
  r.k_ls_plus_bracket = {env[last].value / (2.0 * env[last].alpha), r.k_ls_plus};
  if (last >= 2) {
    const double prev_slope = (env[last - 1].value - env[last - 2].value) /
                              (env[last - 1].alpha - env[last - 2].alpha);
    r.k_ls_plus_extrapolated = std::abs(last_slope - prev_slope) > 0.02 * std::abs(last_slope);
  } else {
    r.k_ls_plus_extrapolated = true;
  }
  r.provenance["k_ls_plus"] = "half the final envelope slope";
  const std::size_t n = curve.alphas.size();
  if (r.k_ls_plus_extrapolated && n >= 2) {
    // theta(alpha)/(2 alpha) approaches the limit like 1/alpha
    const double a0 = curve.alphas[n - 2], a1 = curve.alphas[n - 1];
    const double r0 = curve.theta_vals[n - 2] / (2.0 * a0), r1 = curve.theta_vals[n - 1] / (2.0 * a1);
    const double limit = richardson_linear(1.0 / a0, r0, 1.0 / a1, r1);
    if (std::isfinite(limit) && limit > 0.0) {
      r.k_ls_plus = std::min(limit, 0.5 * last_slope);
      r.k_ls_plus_bracket.lower = std::min(r.k_ls_plus_bracket.lower, r.k_ls_plus);
      r.provenance["k_ls_plus"] = "theta(alpha)/(2 alpha) extrapolated in 1/alpha from the last two points";
    }
  }
  if (r.k_ls_plus_extrapolated) r.flags.push_back("k_ls_plus: final envelope slopes still moving; extrapolated");

  if (curve.alphas.empty() || curve.alphas.front() > 0.05 + 1e-12 || curve.alphas.back() < 5.0)
    r.flags.push_back("alpha range does not span [0.05, 5]; limits are partial");
  if (curve.any_descent_failed) r.flags.push_back("theta: grid descent failed at some alpha");

  const auto [kt, family] = transport_upper(m);
  r.k_t_upper = kt;
  r.provenance["k_t_upper"] = "min 2D/W2^2 over test densities, attained by " + family;

  const KisEstimate kis = kis1_plus(m);
  r.k_is1_plus = kis.value;
  r.provenance["k_is1_plus"] = "small-a extrapolation of (I/I_G)^2";
  if (kis.flagged) r.flags.push_back("k_is1_plus: extrapolants oscillate");

  const GridDensity base = GridDensity::uniform(m);
  r.lyapunov_finite = !lyapunov_exponent(m, base.mean()).effectively_infinite;

  r.not_computed = {
      {"K_C", "needs set optimization as the dimension grows"},
      {"K_C+", "needs set optimization as the dimension grows"},
      {"K_HC", "needs semigroup hypercontractivity sweeps"},
      {"K_IS", "needs set optimization as the dimension grows"},
      {"K_IS-", "needs set optimization as the dimension grows"},
  };
  return r;
}

bool ChainAudit::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.pass; });
}

ChainAudit chain_audit(const ConstantsReport& r, double rel_tol) {
  ChainAudit audit;
  auto check = [&](std::string name, double lhs, double rhs) {
    const bool pass = lhs <= rhs + rel_tol * std::abs(rhs);
    audit.checks.push_back({std::move(name), lhs, rhs, rhs - lhs, pass});
  };
  check("k_cd <= k_ls", r.k_cd, r.k_ls);
  check("k_ls <= k_t_upper", r.k_ls, r.k_t_upper);
  // k_t_upper sits above K_T, so only a failure settles anything
  audit.checks.back().decisive = !audit.checks.back().pass;
  check("k_ls <= k_ls_plus", r.k_ls, r.k_ls_plus);
  // k_ls comes from upper bounds on theta; its certified floor is k_ls_bracket.lower
  for (std::size_t i : {std::size_t{1}, std::size_t{2}}) {
    AuditCheck& c = audit.checks[i];
    if (!c.pass) c.decisive = r.k_ls_bracket.lower > c.rhs + rel_tol * std::abs(c.rhs);
  }
  check("k_ls_plus <= k_is1_plus", r.k_ls_plus, r.k_is1_plus);
  check("k_ls_plus <= 4 k_ls", r.k_ls_plus, 4.0 * r.k_ls);
  if (!r.lyapunov_finite) {
    AuditCheck& c = audit.checks.back();
    c.applicable = false;
    c.pass = true;
    c.decisive = false;
  }
  return audit;
}

}  // namespace isolab
