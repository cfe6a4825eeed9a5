#include "isolab/theta.hpp"

#include <algorithm>
#include <sstream>

namespace isolab {

// ---- ThetaFunction --------------------------------------------------------

ThetaFunction ThetaFunction::linear(double slope) {
  if (!(slope >= 0.0)) throw DomainError("ThetaFunction::linear: slope must be nonnegative");
  ThetaFunction t = piecewise_linear({0.0, 1.0}, {0.0, slope});
  t.extrapolated_beyond_ = kInf;
  return t;
}

ThetaFunction ThetaFunction::piecewise_linear(std::vector<double> r, std::vector<double> value) {
  if (r.size() < 2 || r.size() != value.size())
    throw DomainError("ThetaFunction: need at least two matching knots");
  if (r.front() != 0.0) throw DomainError("ThetaFunction: first knot must be at r = 0");
  for (std::size_t k = 1; k < r.size(); ++k)
    if (!(r[k] > r[k - 1])) throw DomainError("ThetaFunction: knots must be strictly increasing");
  ThetaFunction t;
  t.knots_r_ = std::move(r);
  t.knots_v_ = std::move(value);
  t.zero_at_zero_ = t.knots_v_.front() == 0.0;
  t.extrapolated_beyond_ = t.knots_r_.back();
  double prev = -kInf;
  for (std::size_t k = 0; k + 1 < t.knots_r_.size(); ++k) {
    const double slope = (t.knots_v_[k + 1] - t.knots_v_[k]) / (t.knots_r_[k + 1] - t.knots_r_[k]);
    if (slope < prev - 1e-12 * (1.0 + std::abs(prev))) t.convex_ = false;
    prev = slope;
  }
  const auto& kr = t.knots_r_;
  const auto& kv = t.knots_v_;
  t.eval_ = [kr, kv](double x) {
    std::size_t k = static_cast<std::size_t>(std::upper_bound(kr.begin(), kr.end(), x) - kr.begin());
    k = std::clamp<std::size_t>(k, 1, kr.size() - 1);
    const double slope = (kv[k] - kv[k - 1]) / (kr[k] - kr[k - 1]);
    return kv[k - 1] + slope * (x - kr[k - 1]);
  };
  return t;
}

ThetaFunction ThetaFunction::from_function(std::function<double(double)> f, bool convex) {
  ThetaFunction t;
  t.zero_at_zero_ = std::abs(f(0.0)) <= 1e-12;
  t.eval_ = std::move(f);
  t.convex_ = convex;
  return t;
}

double ThetaFunction::operator()(double r) const {
  if (!(r >= 0.0)) throw DomainError("theta: argument must be nonnegative");
  return eval_(r);
}

bool ThetaFunction::satisfies_preconditions(double r_max, int samples, double tol) const {
  if (!zero_at_zero_ || samples < 3) return false;
  const double dr = r_max / (samples - 1);
  std::vector<double> v(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) v[static_cast<std::size_t>(k)] = eval_(k * dr);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] >= -tol)) return false;
    if (k > 0 && v[k] < v[k - 1] - tol) return false;
    if (convex_ && k > 0 && k + 1 < v.size() && v[k] > 0.5 * (v[k - 1] + v[k + 1]) + tol)
      return false;
  }
  return true;
}

std::string Certificate::tag() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::gaussian: out << "gaussian"; break;
    case Kind::pushforward: out << "pushforward"; break;
    case Kind::grid: out << "grid"; break;
  }
  if (!params.empty()) {
    out << "(";
    for (std::size_t i = 0; i < params.size(); ++i) out << (i ? ";" : "") << params[i];
    out << ")";
  }
  return out.str();
}

// ---- pointwise search -----------------------------------------------------

namespace {

struct Evaluation {
  double entropy = 0.0;
  double fisher = kInf;
};

Evaluation evaluate(const GridDensity& d) {
  return {relative_entropy(d), fisher_information(d).value};
}

class ParametricSearch {
 public:
  ParametricSearch(const ReferenceMeasure& m, double alpha, const ThetaOptions& opts)
      : m_(m), alpha_(alpha), opts_(opts) {
    const GridDensity base = GridDensity::uniform(m);
    mean_ = base.mean();
    sd_ = std::sqrt(base.variance());
    reach_ = 0.5 * (m.hi() - m.lo());
  }

  GridDensity density(Certificate::Kind kind, double loc, double scale) const {
    const Vector& x = m_.nodes();
    Vector log_rho(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (kind == Certificate::Kind::gaussian) {
        const double z = (x(i) - loc) / scale;
        log_rho(i) = -0.5 * z * z + m_.potential(x(i));
      } else {
        log_rho(i) = -m_.potential((x(i) - loc) / scale) + m_.potential(x(i));
      }
    }
    return GridDensity::from_log_values(m_, log_rho);
  }

  double entropy(Certificate::Kind kind, double loc, double scale) const {
    return relative_entropy(density(kind, loc, scale));
  }

  // Best feasible point of one family at a fixed scale.
  Certificate at_scale(Certificate::Kind kind, double scale) const {
    Certificate best;
    best.kind = kind;
    best.fisher = kInf;
    const double center = kind == Certificate::Kind::gaussian ? mean_ : 0.0;
    const double lo = center - reach_, hi = center + reach_;
    const ScalarOptimum low =
        golden_minimize([&](double b) { return entropy(kind, b, scale); }, lo, hi, 1e-9 * sd_);
    auto consider = [&](double loc) {
      const Evaluation e = evaluate(density(kind, loc, scale));
      if (e.entropy >= alpha_ * (1.0 - 1e-9) && e.fisher < best.fisher)
        best = {kind, {loc, scale}, e.entropy, e.fisher, std::nullopt};
    };
    if (low.value >= alpha_) {
      consider(low.x);
      return best;
    }
    for (double edge : {lo, hi}) {
      if (entropy(kind, edge, scale) < alpha_) continue;
      const double loc = bisect([&](double b) { return entropy(kind, b, scale) - alpha_; },
                                std::min(low.x, edge), std::max(low.x, edge), 1e-13 * sd_);
      // step onto the feasible side of the root
      const double outward = edge > low.x ? 1.0 : -1.0;
      double feasible = loc;
      for (int k = 0; k < 8 && entropy(kind, feasible, scale) < alpha_; ++k)
        feasible += outward * 1e-12 * sd_ * std::ldexp(1.0, k);
      consider(feasible);
    }
    return best;
  }

  Certificate family_best(Certificate::Kind kind) const {
    const double unit = kind == Certificate::Kind::gaussian ? sd_ : 1.0;
    const int n = std::max(3, opts_.scale_grid);
    const double lo = std::log(0.3), hi = std::log(3.0);
    std::vector<Certificate> grid(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      grid[static_cast<std::size_t>(k)] = at_scale(kind, unit * std::exp(lo + (hi - lo) * k / (n - 1)));
    std::size_t arg = 0;
    for (std::size_t k = 1; k < grid.size(); ++k)
      if (grid[k].fisher < grid[arg].fisher) arg = k;
    Certificate best = grid[arg];
    if (!std::isfinite(best.fisher)) return best;
    const double step = (hi - lo) / (n - 1);
    const double a = lo + step * (static_cast<double>(arg) - 1.0);
    const double b = lo + step * (static_cast<double>(arg) + 1.0);
    const ScalarOptimum refined = golden_minimize(
        [&](double ls) { return at_scale(kind, unit * std::exp(ls)).fisher; }, a, b, 1e-5);
    Certificate candidate = at_scale(kind, unit * std::exp(refined.x));
    if (candidate.fisher < best.fisher) best = candidate;
    return best;
  }

 private:
  const ReferenceMeasure& m_;
  double alpha_;
  const ThetaOptions& opts_;
  double mean_ = 0.0, sd_ = 1.0, reach_ = 1.0;
};

// Gradient descent on u = sqrt(rho) over the unit sphere of L2(nu) with a
// quadratic penalty on the entropy deficit.
class SphereDescent {
 public:
  SphereDescent(const ReferenceMeasure& m, double alpha)
      : c_(m.node_weights()), p_(m.midpoint_pdf()), h_(m.spacing()), alpha_(alpha) {}

  double dirichlet(const Vector& u) const {
    const Eigen::Index n = u.size();
    const Vector du = u.tail(n - 1) - u.head(n - 1);
    return 4.0 * p_.dot(du.cwiseAbs2()) / h_;
  }

  double entropy(const Vector& u) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double r = u(i) * u(i);
      if (r > 0.0) total += c_(i) * r * std::log(r);
    }
    return total;
  }

  double objective(const Vector& u, double w) const {
    const double deficit = std::max(0.0, alpha_ - entropy(u));
    return dirichlet(u) + w * deficit * deficit;
  }

  Vector gradient(const Vector& u, double w) const {
    const Eigen::Index n = u.size();
    Vector g = Vector::Zero(n);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      const double flux = 8.0 * p_(j) * (u(j + 1) - u(j)) / h_;
      g(j) -= flux;
      g(j + 1) += flux;
    }
    const double deficit = std::max(0.0, alpha_ - entropy(u));
    if (deficit > 0.0) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = u(i) * u(i);
        if (r > 0.0) g(i) -= 2.0 * w * deficit * 2.0 * c_(i) * u(i) * (std::log(r) + 1.0);
      }
    }
    return g;
  }

  Vector normalize(Vector u) const {
    u = u.cwiseAbs();
    const double norm = std::sqrt(c_.dot(u.cwiseAbs2()));
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericError("sphere descent: lost mass");
    return u / norm;
  }

  // Solves (8 K + mu C) z = g with K the Dirichlet stiffness matrix.
  Vector precondition(const Vector& g, double mu) const {
    const Eigen::Index n = g.size();
    Vector sub = Vector::Zero(n), diag = mu * c_, sup = Vector::Zero(n);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      const double k = 8.0 * p_(j) / h_;
      diag(j) += k;
      diag(j + 1) += k;
      sup(j) = -k;
      sub(j + 1) = -k;
    }
    Vector z = g;
    solve_tridiagonal(sub, diag, sup, z);
    return z;
  }

  Vector run(Vector u, const ThetaOptions& opts) const {
    u = normalize(std::move(u));
    const double mu = 1.0 + dirichlet(u);
    double w = opts.initial_penalty;
    for (int stage = 0; stage < opts.stages; ++stage, w *= 10.0) {
      double f = objective(u, w);
      double t = 1.0;
      for (int it = 0; it < opts.iterations_per_stage; ++it) {
        const Vector g = gradient(u, w);
        Vector z = precondition(g, mu);
        z -= c_.dot(u.cwiseProduct(z)) * u;  // tangent to the sphere
        const double slope = g.dot(z);
        if (!(slope > 0.0)) break;
        t = std::min(1.0, 2.0 * t);
        Vector trial;
        double f_trial = kInf;
        for (int k = 0; k < 50; ++k, t *= 0.5) {
          trial = normalize(u - t * z);
          f_trial = objective(trial, w);
          if (f_trial <= f - 1e-4 * t * slope) break;
        }
        if (!(f_trial < f)) break;
        const double gain = f - f_trial;
        u = std::move(trial);
        f = f_trial;
        if (gain <= 1e-14 * f) break;
      }
      if (!std::isfinite(f)) throw NumericError("sphere descent: diverged");
    }
    return u;
  }

 private:
  Vector c_, p_;
  double h_;
  double alpha_;
};

// Raises rho to the power gamma >= 1 until D reaches alpha.
std::optional<GridDensity> repair(const ReferenceMeasure& m, const Vector& rho, double alpha) {
  Vector log_rho(rho.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    log_rho(i) = rho(i) > 0.0 ? std::log(rho(i)) : -kInf;
  auto powered = [&](double gamma) { return GridDensity::from_log_values(m, gamma * log_rho); };
  GridDensity base = powered(1.0);
  if (relative_entropy(base) >= alpha) return base;
  double hi = 2.0;
  while (relative_entropy(powered(hi)) < alpha) {
    hi *= 2.0;
    if (hi > 64.0) return std::nullopt;
  }
  const double gamma =
      bisect([&](double g) { return relative_entropy(powered(g)) - alpha; }, 1.0, hi, 1e-14);
  // nudge to the feasible side
  double g = gamma;
  for (int k = 0; k < 60 && relative_entropy(powered(g)) < alpha; ++k) g += 1e-14 * std::ldexp(1.0, k);
  return powered(g);
}

}  // namespace

ThetaPoint theta_at(const ReferenceMeasure& m, double alpha, const ThetaOptions& opts) {
  if (!(alpha > 0.0)) throw DomainError("theta_at: alpha must be positive");
  const ParametricSearch search(m, alpha, opts);
  Certificate best = search.family_best(Certificate::Kind::gaussian);
  const Certificate push = search.family_best(Certificate::Kind::pushforward);
  if (push.fisher < best.fisher) best = push;
  if (!std::isfinite(best.fisher))
    throw NumericError("theta_at: no test density reaches the entropy level");

  ThetaPoint out;
  out.alpha = alpha;
  out.parametric_value = best.fisher;
  out.dual_lower = 2.0 * std::max(kcd_constant(m).value, 0.0) * alpha;

  if (opts.descent) {
    try {
      const GridDensity start = search.density(best.kind, best.params[0], best.params[1]);
      const SphereDescent descent(m, alpha);
      const Vector u = descent.run(start.rho().cwiseSqrt(), opts);
      const auto fixed = repair(m, u.cwiseAbs2(), alpha);
      if (!fixed) {
        out.descent_failed = true;
      } else {
        const Evaluation e = evaluate(*fixed);
        if (e.entropy >= alpha * (1.0 - 1e-9) && e.fisher < best.fisher)
          best = {Certificate::Kind::grid, {}, e.entropy, e.fisher, fixed->rho()};
      }
    } catch (const NumericError&) {
      out.descent_failed = true;
    }
  }
  out.value = best.fisher;
  out.certificate = std::move(best);
  return out;
}

const std::vector<double>& extended_alpha_grid() {
  static const std::vector<double> grid{0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0};
  return grid;
}

const std::vector<double>& default_alpha_grid() {
  static const std::vector<double> grid{0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
  return grid;
}

std::vector<EnvelopeNode> lower_convex_hull(std::vector<EnvelopeNode> points) {
  points.push_back({0.0, 0.0});
  for (const auto& p : points)
    if (!(p.alpha >= 0.0) || !std::isfinite(p.value))
      throw DomainError("lower_convex_hull: points need alpha >= 0 and finite values");
  std::sort(points.begin(), points.end(), [](const EnvelopeNode& a, const EnvelopeNode& b) {
    return a.alpha < b.alpha || (a.alpha == b.alpha && a.value < b.value);
  });
  std::vector<EnvelopeNode> hull;
  for (const auto& p : points) {
    if (!hull.empty() && hull.back().alpha == p.alpha) continue;  // keep the lowest
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& a = hull.back();
      const double cross = (a.alpha - o.alpha) * (p.value - o.value) - (a.value - o.value) * (p.alpha - o.alpha);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(p);
  }
  return hull;
}

ThetaFunction theta_breve(const ThetaCurve& curve) {
  if (curve.envelope.size() < 2) throw ContractError("theta_breve: envelope needs two nodes");
  std::vector<double> r, v;
  for (const auto& node : curve.envelope) {
    r.push_back(node.alpha);
    v.push_back(node.value);
  }
  return ThetaFunction::piecewise_linear(std::move(r), std::move(v));
}

double ThetaCurve::envelope_at(double alpha) const { return theta_breve(*this)(alpha); }

ThetaCurve theta_curve(const ReferenceMeasure& m, const std::vector<double>& alphas,
                       const ThetaOptions& opts) {
  std::vector<double> sorted = alphas;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.empty()) throw DomainError("theta_curve: no alpha values");
  std::vector<ThetaPoint> points(sorted.size());
  parallel_for(sorted.size(), [&](std::size_t k) { points[k] = theta_at(m, sorted[k], opts); });

  // A density feasible at a higher level is feasible at every lower one.
  for (std::size_t k = points.size() - 1; k-- > 0;) {
    if (points[k + 1].value < points[k].value) {
      const double alpha = points[k].alpha, dual = points[k].dual_lower;
      const bool failed = points[k].descent_failed;
      points[k] = points[k + 1];
      points[k].alpha = alpha;
      points[k].dual_lower = dual;
      points[k].descent_failed = failed;
    }
  }

  ThetaCurve curve;
  std::vector<EnvelopeNode> samples;
  for (auto& p : points) {
    curve.alphas.push_back(p.alpha);
    curve.theta_vals.push_back(p.value);
    curve.dual_lower.push_back(p.dual_lower);
    curve.any_descent_failed = curve.any_descent_failed || p.descent_failed;
    samples.push_back({p.alpha, p.value});
    curve.certificates.push_back(std::move(p.certificate));
  }
  curve.envelope = lower_convex_hull(std::move(samples));
  return curve;
}

TensorizationReport tensorization_check(const ThetaCurve& curve, double beta,
                                        const std::function<LevelSample(double)>& level,
                                        double tol) {
  if (!(beta > 0.0)) throw DomainError("tensorization_check: beta must be positive");
  TensorizationReport rep{};
  rep.beta = beta;
  rep.envelope_val = curve.envelope_at(beta);
  rep.product_bound = kInf;
  if (curve.certificates.size() != curve.alphas.size()) {
    rep.skipped = true;
    return rep;
  }
  auto consider = [&](double lo, const LevelSample& a, double hi, const LevelSample& b) {
    const double d = 0.5 * (a.entropy + b.entropy);
    const double i = 0.5 * (a.fisher + b.fisher);
    if (d >= beta * (1.0 - 1e-9) && i < rep.product_bound) {
      rep.product_bound = i;
      rep.split_low = lo;
      rep.split_high = hi;
    }
  };
  bool beta_on_curve = false;
  for (std::size_t k = 0; k < curve.alphas.size(); ++k) {
    const double lo = curve.alphas[k];
    if (lo > beta) break;
    const LevelSample first{curve.certificates[k].entropy, curve.certificates[k].fisher};
    const double hi = 2.0 * beta - lo;
    if (lo == beta) beta_on_curve = true;
    consider(lo, first, hi, lo == beta ? first : level(hi));
  }
  if (!beta_on_curve) {
    const LevelSample mid = level(beta);
    consider(beta, mid, beta, mid);
  }
  rep.holds = rep.product_bound >= rep.envelope_val - tol;
  rep.tight = std::abs(rep.product_bound - rep.envelope_val) <= 0.05 * rep.envelope_val;
  return rep;
}

TensorizationReport tensorization_check(const ReferenceMeasure& m, const ThetaCurve& curve,
                                        double beta, const ThetaOptions& opts, double tol) {
  return tensorization_check(
      curve, beta,
      [&](double alpha) {
        const ThetaPoint p = theta_at(m, alpha, opts);
        return LevelSample{p.certificate.entropy, p.value};
      },
      tol);
}

}  // namespace isolab
