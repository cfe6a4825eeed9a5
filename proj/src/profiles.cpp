#include "isolab/profiles.hpp"

#include <algorithm>
#include <array>

namespace isolab {

double gaussian_profile(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("gaussian_profile: a outside [0,1]");
  if (a == 0.0 || a == 1.0) return 0.0;
  return normal_pdf(normal_quantile(a));
}

double bobkov_profile(const ReferenceMeasure& m, double a) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("bobkov_profile: a must lie in (0,1)");
  const double b = std::min(a, 1.0 - a);
  return std::min(m.density(m.quantile(b)), m.density(m.upper_quantile(b)));
}

double log_iso_ratio(const ProfileCurve& curve, double a) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("log_iso_ratio: a must lie in (0,1)");
  return curve(a) / (a * std::sqrt(2.0 * std::log(1.0 / a)));
}

Vector ProfileCurve::sample(const Vector& a) const {
  Vector out(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out(i) = value_(a(i));
  return out;
}

ProfileCurve ProfileCurve::gaussian() {
  return ProfileCurve(
      ProfileSource::gaussian, "gaussian", [](double a) { return gaussian_profile(a); },
      [](double a) {
        if (a <= 0.0) return kInf;
        if (a >= 1.0) return -kInf;
        return -normal_quantile(a);
      },
      true, true);
}

ProfileCurve ProfileCurve::custom(std::string label, std::function<double(double)> value,
                                  std::function<double(double)> slope, bool symmetric) {
  return ProfileCurve(ProfileSource::custom, std::move(label), std::move(value),
                      std::move(slope), true, symmetric);
}

namespace {

// One tail branch b -> I(b), tabulated against l = ln b.
struct HermiteTable {
  double l0 = 0.0, dl = 1.0;
  std::vector<double> y, dy;  // dy = dI/dl

  double value(double l) const {
    const auto n = static_cast<double>(y.size() - 1);
    const double pos = std::clamp((l - l0) / dl, 0.0, n);
    const auto k = std::min(static_cast<std::size_t>(pos), y.size() - 2);
    const double s = pos - static_cast<double>(k);
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * y[k] + h10 * dl * dy[k] + h01 * y[k + 1] + h11 * dl * dy[k + 1];
  }

  double derivative(double l) const {
    const auto n = static_cast<double>(y.size() - 1);
    const double pos = std::clamp((l - l0) / dl, 0.0, n);
    const auto k = std::min(static_cast<std::size_t>(pos), y.size() - 2);
    const double s = pos - static_cast<double>(k);
    const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
    const double d01 = -d00, d11 = 3 * s * s - 2 * s;
    return (d00 * y[k] + d01 * y[k + 1]) / dl + d10 * dy[k] + d11 * dy[k + 1];
  }
};

struct BobkovTables {
  HermiteTable lower, upper;
  double b_min;
};

}  // namespace

ProfileCurve ProfileCurve::bobkov(const ReferenceMeasure& m) {
  constexpr int kNodes = 600;
  auto tables = std::make_shared<BobkovTables>();
  tables->b_min = 1e-12;
  const double l0 = std::log(tables->b_min), l1 = std::log(0.5);
  const double dl = (l1 - l0) / (kNodes - 1);
  // V' is sampled a hair inside each tail so kinks at the median do not
  // leak the wrong one-sided slope into the last node.
  const double nudge = 1e-7 * m.spacing();
  for (HermiteTable* t : {&tables->lower, &tables->upper}) {
    t->l0 = l0;
    t->dl = dl;
    t->y.resize(kNodes);
    t->dy.resize(kNodes);
  }
  parallel_for(static_cast<std::size_t>(kNodes), [&](std::size_t k) {
    const double b = std::exp(l0 + dl * static_cast<double>(k));
    const double xl = m.quantile(std::min(b, 0.5));
    const double xu = m.upper_quantile(std::min(b, 0.5));
    tables->lower.y[k] = m.density(xl);
    tables->lower.dy[k] = -b * m.potential_d1(xl - nudge);
    tables->upper.y[k] = m.density(xu);
    tables->upper.dy[k] = b * m.potential_d1(xu + nudge);
  });

  bool symmetric = true;
  for (double b : {1e-6, 1e-3, 0.05, 0.2, 0.4}) {
    const double lo = m.density(m.quantile(b)), hi = m.density(m.upper_quantile(b));
    if (std::abs(lo - hi) > 1e-6 * std::max(lo, hi)) symmetric = false;
  }

  // Returns (I(b), dI/db) for b in [0, 1/2].
  auto branch = [tables](double b) -> std::pair<double, double> {
    if (b <= 0.0) return {0.0, 0.0};
    if (b < tables->b_min) {
      const double lm = std::log(tables->b_min);
      const double y = std::min(tables->lower.value(lm), tables->upper.value(lm));
      return {y * b / tables->b_min, y / tables->b_min};
    }
    const double l = std::log(b);
    const double yl = tables->lower.value(l), yu = tables->upper.value(l);
    if (yl <= yu) return {yl, tables->lower.derivative(l) / b};
    return {yu, tables->upper.derivative(l) / b};
  };

  auto value = [branch](double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("bobkov profile: a outside [0,1]");
    return branch(std::min(a, 1.0 - a)).first;
  };
  auto slope = [branch](double a) {
    const double d = branch(std::min(a, 1.0 - a)).second;
    return a <= 0.5 ? d : -d;
  };
  return ProfileCurve(ProfileSource::bobkov, "bobkov:" + m.family().describe(), value, slope,
                      m.is_log_concave(), symmetric);
}

KisEstimate kis1_plus(const ReferenceMeasure& measure) {
  if (measure.family().family == Family::custom)
    throw ContractError("kis1_plus: custom potentials have no curvature limits");
  // a = 1e-12 is only resolved if far less mass than that was truncated.
  MeasureOptions deep;
  deep.grid_nodes = static_cast<int>(measure.grid_size());
  deep.tail_mass = 1e-30;
  const ReferenceMeasure m = ReferenceMeasure::from_tag(measure.family(), deep);
  constexpr int kFirst = 4, kLast = 12;
  std::vector<double> h, r;
  for (int k = kFirst; k <= kLast; ++k) {
    const double a = std::pow(10.0, -k);
    const double ratio = bobkov_profile(m, a) / gaussian_profile(a);
    h.push_back(1.0 / std::log(1.0 / a));
    r.push_back(ratio * ratio);
  }
  std::vector<double> extrapolants;
  for (std::size_t i = 0; i + 1 < h.size(); ++i)
    extrapolants.push_back(richardson_linear(h[i], r[i], h[i + 1], r[i + 1]));
  const double value = std::max(0.0, extrapolants.back());
  const auto tail = extrapolants.end() - 3;
  const auto [lo, hi] = std::minmax_element(tail, extrapolants.end());
  const double oscillation = (*hi - *lo) / std::max(std::abs(value), 0.05);
  const double limit = std::min(m.potential_d2(m.lo()), m.potential_d2(m.hi()));
  return {value, limit, oscillation, oscillation > 0.05};
}

namespace {

struct QuadPoint {
  int cell;
  double xi;      // position within the cell, in [0,1]
  double weight;  // includes the cell width
  double i1_sq;   // I1(t)^2
};

// Gauss-Legendre on every cell; the two boundary cells are split
// geometrically toward t = 0 and t = 1 where I1 loses smoothness.
std::vector<QuadPoint> build_quadrature(const ProfileCurve& i1, int cells) {
  const auto& gl = GaussLegendre::rule(8);
  const double dt = 1.0 / cells;
  std::vector<QuadPoint> q;
  auto add = [&](int cell, double x0, double x1) {  // local coordinates
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double xi = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * gl.nodes[k];
      const double t = (cell + xi) * dt;
      const double v = i1(t);
      q.push_back({cell, xi, 0.5 * (x1 - x0) * gl.weights[k] * dt, v * v});
    }
  };
  constexpr int kLevels = 30;
  for (int c = 0; c < cells; ++c) {
    if (c == 0 || c == cells - 1) {
      std::vector<double> cuts{0.0};
      for (int l = kLevels; l >= 1; --l) cuts.push_back(std::ldexp(1.0, -l));
      cuts.push_back(1.0);
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (c == 0) add(c, cuts[k], cuts[k + 1]);
        else add(c, 1.0 - cuts[k + 1], 1.0 - cuts[k]);
      }
    } else {
      add(c, 0.0, 1.0);
    }
  }
  return q;
}

class LengthFunctional {
 public:
  LengthFunctional(const ProfileCurve& i1, const ProfileCurve& i2, int cells)
      : i2_(i2), cells_(cells), dt_(1.0 / cells), quad_(build_quadrature(i1, cells)) {}

  double operator()(const Vector& phi, Vector* grad) const {
    double total = 0.0;
    if (grad) grad->setZero(phi.size());
    for (const QuadPoint& p : quad_) {
      const double p0 = phi(p.cell), p1 = phi(p.cell + 1);
      const double v = std::clamp((1.0 - p.xi) * p0 + p.xi * p1, 0.0, 1.0);
      const double s = (p1 - p0) / dt_;
      const double iv = i2_(v);
      const double g = std::sqrt(iv * iv + p.i1_sq * s * s);
      total += p.weight * g;
      if (!grad || g == 0.0) continue;
      // I2 * I2' vanishes at the ends even where I2' is infinite.
      const double dv = (v <= 0.0 || v >= 1.0) ? 0.0 : iv * i2_.slope(v) / g;
      const double ds = p.i1_sq * s / g;
      (*grad)(p.cell) += p.weight * (dv * (1.0 - p.xi) - ds / dt_);
      (*grad)(p.cell + 1) += p.weight * (dv * p.xi + ds / dt_);
    }
    return total;
  }

  int cells() const { return cells_; }
  double dt() const { return dt_; }

 private:
  const ProfileCurve& i2_;
  int cells_;
  double dt_;
  std::vector<QuadPoint> quad_;
};

// Euclidean projection onto {0 <= phi <= 1, w . phi = a}.
Vector project(const Vector& y, const Vector& w, double a) {
  auto mass = [&](double c) {
    return w.dot((y - c * w).cwiseMax(0.0).cwiseMin(1.0));
  };
  double lo = kInf, hi = -kInf;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    lo = std::min(lo, (y(i) - 1.0) / w(i));
    hi = std::max(hi, y(i) / w(i));
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > a ? lo : hi) = mid;
  }
  return (y - 0.5 * (lo + hi) * w).cwiseMax(0.0).cwiseMin(1.0);
}

struct DescentResult {
  double value;
  Vector phi;
  bool converged;
};

// Spectral projected gradient with a nonmonotone Armijo rule.
DescentResult descend(const LengthFunctional& J, Vector phi, const Vector& w, double a,
                      const VariationalOptions& opts) {
  constexpr int kMemory = 10;
  constexpr double kArmijo = 1e-4;
  Vector g;
  double f = J(phi, &g);
  std::vector<double> history{f};
  Vector best = phi;
  double best_f = f;
  Vector d = project(phi - g, w, a) - phi;
  double step = 1.0 / std::max(d.cwiseAbs().maxCoeff(), 1e-300);
  int quiet = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    step = std::clamp(step, 1e-12, 1e12);
    d = project(phi - step * g, w, a) - phi;
    if (d.cwiseAbs().maxCoeff() <= 1e-15) return {best_f, best, true};
    const double ref = *std::max_element(history.end() - std::min<std::ptrdiff_t>(
                                             kMemory, static_cast<std::ptrdiff_t>(history.size())),
                                         history.end());
    const double slope = g.dot(d);
    double t = 1.0;
    Vector trial, g_trial;
    double f_trial = 0.0;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      trial = phi + t * d;
      f_trial = J(trial, &g_trial);
      if (f_trial <= ref + kArmijo * t * slope) break;
    }
    const Vector s = trial - phi, y = g_trial - g;
    const double sy = s.dot(y);
    step = sy > 0.0 ? s.squaredNorm() / sy : 1e12;
    phi = std::move(trial);
    g = std::move(g_trial);
    f = f_trial;
    history.push_back(f);
    if (f < best_f * (1.0 - opts.rel_tol)) {
      best_f = f;
      best = phi;
      quiet = 0;
    } else if (++quiet > 200) {
      return {best_f, best, true};
    }
  }
  return {best_f, best, false};
}

}  // namespace

VariationalResult product_profile_variational(const ProfileCurve& i1, const ProfileCurve& i2,
                                              double a, const VariationalOptions& opts) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("product_profile_variational: a must lie in (0,1)");
  if (opts.cells < 4) throw DomainError("product_profile_variational: need at least 4 cells");
  const LengthFunctional J(i1, i2, opts.cells);
  const Eigen::Index n = opts.cells + 1;
  Vector w = Vector::Constant(n, J.dt());
  w(0) *= 0.5;
  w(n - 1) *= 0.5;
  const Vector t = Vector::LinSpaced(n, 0.0, 1.0);

  const std::array<Vector, 3> starts{Vector::Constant(n, a), project(t, w, a),
                                     project(Vector::Ones(n) - t, w, a)};
  std::array<DescentResult, 3> runs;
  parallel_for(starts.size(), [&](std::size_t k) { runs[k] = descend(J, starts[k], w, a, opts); });

  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k)
    if (runs[k].value < runs[best].value) best = k;
  return {runs[best].value, runs[best].phi, static_cast<int>(best), !runs[best].converged};
}

ConjectureReport conjecture_check(const ProfileCurve& i1, const ProfileCurve& i2, double a,
                                  double tol, const VariationalOptions& opts) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("conjecture_check: a must lie in (0,1)");
  const VariationalResult var = product_profile_variational(i1, i2, a, opts);
  const double lhs = var.value / a;

  // a2 = a^s, a1 = a^(1-s)
  auto split = [&](double s) {
    const double a2 = std::pow(a, s), a1 = a / a2;
    const double r1 = i1(a1) / a1, r2 = i2(a2) / a2;
    return r1 * r1 + r2 * r2;
  };
  constexpr int kGrid = 400;
  std::vector<double> vals(kGrid + 1);
  for (int k = 0; k <= kGrid; ++k) vals[static_cast<std::size_t>(k)] = split(double(k) / kGrid);
  double best_s = 0.0, best = vals[0];
  for (int k = 1; k <= kGrid; ++k) {
    if (vals[static_cast<std::size_t>(k)] < best) {
      best = vals[static_cast<std::size_t>(k)];
      best_s = double(k) / kGrid;
    }
  }
  const ScalarOptimum refined = golden_minimize(split, std::max(0.0, best_s - 1.0 / kGrid),
                                                std::min(1.0, best_s + 1.0 / kGrid), 1e-12);
  if (refined.value < best) {
    best = refined.value;
    best_s = refined.x;
  }
  // smallest a1 attaining the infimum: scan from s = 0 for the first grid
  // point within tolerance
  for (int k = 0; k <= kGrid; ++k) {
    const double s = double(k) / kGrid;
    if (s >= best_s) break;
    if (vals[static_cast<std::size_t>(k)] <= best * (1.0 + 1e-12)) {
      best_s = s;
      best = vals[static_cast<std::size_t>(k)];
      break;
    }
  }

  ConjectureReport rep;
  rep.value = var.value;
  rep.lhs_sq = lhs * lhs;
  rep.rhs_inf = best;
  rep.a2 = std::pow(a, best_s);
  rep.a1 = a / rep.a2;
  rep.holds = rep.lhs_sq >= rep.rhs_inf - tol;
  rep.inconclusive = std::abs(rep.lhs_sq - rep.rhs_inf) < tol;
  rep.stalled = var.stalled;
  rep.exact_reduction = i1.symmetric() && i2.symmetric() && i1.extremal() && i2.extremal();
  return rep;
}

}  // namespace isolab
