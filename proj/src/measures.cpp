#include "isolab/measures.hpp"

#include <algorithm>
#include <sstream>

namespace isolab {

std::string to_string(Family family) {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::laplace_smoothed: return "laplace_smoothed";
    case Family::logistic: return "logistic";
    case Family::interp_curvature: return "interp_curvature";
    case Family::custom: return "custom";
  }
  return "unknown";
}

std::string FamilyTag::describe() const {
  std::ostringstream out;
  out << to_string(family) << "(";
  for (std::size_t i = 0; i < params.size(); ++i) out << (i ? ", " : "") << params[i];
  out << ")";
  return out.str();
}

namespace {

// Natural cubic spline through (xs, ys).
class CubicSpline {
 public:
  CubicSpline(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)), m_(xs_.size(), 0.0) {
    const std::size_t n = xs_.size();
    if (n < 2 || ys_.size() != n) throw DomainError("custom potential: need >= 2 matching points");
    for (std::size_t i = 1; i < n; ++i)
      if (!(xs_[i] > xs_[i - 1])) throw DomainError("custom potential: x must be strictly increasing");
    if (n == 2) return;
    const Eigen::Index k = static_cast<Eigen::Index>(n - 2);
    Vector sub(k), diag(k), sup(k), rhs(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const std::size_t i = static_cast<std::size_t>(j) + 1;
      const double h0 = xs_[i] - xs_[i - 1], h1 = xs_[i + 1] - xs_[i];
      sub(j) = h0 / 6.0;
      diag(j) = (h0 + h1) / 3.0;
      sup(j) = h1 / 6.0;
      rhs(j) = (ys_[i + 1] - ys_[i]) / h1 - (ys_[i] - ys_[i - 1]) / h0;
    }
    solve_tridiagonal(sub, diag, sup, rhs);
    for (Eigen::Index j = 0; j < k; ++j) m_[static_cast<std::size_t>(j) + 1] = rhs(j);
  }

  bool inside(double x) const { return x >= xs_.front() && x <= xs_.back(); }

  // derivative order 0, 1 or 2
  double eval(double x, int order) const {
    if (!inside(x)) return order == 0 ? kInf : 0.0;
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
    i = std::clamp<std::size_t>(i, 1, xs_.size() - 1);
    const double x0 = xs_[i - 1], x1 = xs_[i], h = x1 - x0;
    const double a = (x1 - x) / h, b = (x - x0) / h;
    const double m0 = m_[i - 1], m1 = m_[i];
    switch (order) {
      case 0:
        return a * ys_[i - 1] + b * ys_[i] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
      case 1:
        return (ys_[i] - ys_[i - 1]) / h - (3.0 * a * a - 1.0) * h / 6.0 * m0 +
               (3.0 * b * b - 1.0) * h / 6.0 * m1;
      default:
        return a * m0 + b * m1;
    }
  }

  double front() const { return xs_.front(); }
  double back() const { return xs_.back(); }

 private:
  std::vector<double> xs_, ys_, m_;
};

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

std::shared_ptr<ReferenceMeasure::Data> ReferenceMeasure::tabulate(FamilyTag tag,
                                                                   Potential potential,
                                                                   double lo, double hi,
                                                                   int grid_nodes) {
  require(grid_nodes >= 16, "grid_nodes must be at least 16");
  require(hi > lo, "support must satisfy lo < hi");
  auto d = std::make_shared<Data>();
  d->tag = std::move(tag);
  d->potential = std::move(potential);
  d->lo = lo;
  d->hi = hi;
  const Eigen::Index n = grid_nodes;
  d->h = (hi - lo) / static_cast<double>(n - 1);
  d->nodes = Vector::LinSpaced(n, lo, hi);

  const auto& V = d->potential.value;
  double v_ref = kInf;
  for (Eigen::Index i = 0; i < n; ++i) v_ref = std::min(v_ref, V(d->nodes(i)));
  if (!std::isfinite(v_ref)) throw NumericError("potential is not finite on the support");
  d->v_ref = v_ref;

  const auto unnormalized = [&V, v_ref](double x) { return std::exp(-(V(x) - v_ref)); };
  Vector cell(n - 1);
  for (Eigen::Index j = 0; j < n - 1; ++j)
    cell(j) = integrate(unnormalized, d->nodes(j), d->nodes(j + 1), 0.0, 1e-13);
  const double total = cell.sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericError("measure has no mass on support");
  d->log_z = std::log(total) - v_ref;

  d->cum_lower.resize(n);
  d->cum_upper.resize(n);
  d->cum_lower(0) = 0.0;
  for (Eigen::Index j = 0; j < n - 1; ++j) d->cum_lower(j + 1) = d->cum_lower(j) + cell(j) / total;
  d->cum_upper(n - 1) = 0.0;
  for (Eigen::Index j = n - 2; j >= 0; --j) d->cum_upper(j) = d->cum_upper(j + 1) + cell(j) / total;
  d->cum_lower(n - 1) = 1.0;
  d->cum_upper(0) = 1.0;

  d->node_pdf.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) d->node_pdf(i) = std::exp(-V(d->nodes(i)) - d->log_z);
  d->weights = d->node_pdf * d->h;
  d->weights(0) *= 0.5;
  d->weights(n - 1) *= 0.5;
  const double wsum = d->weights.sum();
  d->weights /= wsum;
  d->mid_pdf.resize(n - 1);
  for (Eigen::Index j = 0; j < n - 1; ++j)
    d->mid_pdf(j) = std::exp(-V(d->nodes(j) + 0.5 * d->h) - d->log_z) / wsum;
  return d;
}

ReferenceMeasure ReferenceMeasure::build(FamilyTag tag, Potential potential, double center,
                                         double scale, const MeasureOptions& opts) {
  if (opts.support) {
    return ReferenceMeasure(
        tabulate(std::move(tag), std::move(potential), opts.support->first, opts.support->second,
                 opts.grid_nodes));
  }
  // Coarse window well past the tail_mass level, then truncate at the
  // tail_mass quantiles.
  require(opts.tail_mass > 0.0 && opts.tail_mass < 0.5, "tail_mass must lie in (0, 1/2)");
  const double depth = -std::log(opts.tail_mass) + 15.0;
  double v_min = kInf;
  for (int i = -200; i <= 200; ++i) v_min = std::min(v_min, potential.value(center + 0.05 * i * scale));
  double step = scale;
  double left = center - step;
  while (potential.value(left) - v_min < depth) {
    step *= 1.5;
    left = center - step;
    if (step > 1e8 * scale) throw NumericError("measure: potential does not grow on the left");
  }
  step = scale;
  double right = center + step;
  while (potential.value(right) - v_min < depth) {
    step *= 1.5;
    right = center + step;
    if (step > 1e8 * scale) throw NumericError("measure: potential does not grow on the right");
  }
  const ReferenceMeasure window(tabulate(tag, potential, left, right, opts.grid_nodes));
  const double lo = window.quantile(opts.tail_mass);
  const double hi = window.upper_quantile(opts.tail_mass);
  return ReferenceMeasure(tabulate(std::move(tag), std::move(potential), lo, hi, opts.grid_nodes));
}

ReferenceMeasure ReferenceMeasure::gaussian(double mean, double variance, MeasureOptions opts) {
  require(variance > 0.0, "gaussian: variance must be positive");
  Potential p{[=](double x) { return 0.5 * (x - mean) * (x - mean) / variance; },
              [=](double x) { return (x - mean) / variance; },
              [=](double) { return 1.0 / variance; }};
  return build({Family::gaussian, {mean, variance}}, std::move(p), mean, std::sqrt(variance), opts);
}

ReferenceMeasure ReferenceMeasure::laplace_smoothed(double scale, double smoothing,
                                                    MeasureOptions opts) {
  require(scale > 0.0, "laplace_smoothed: scale must be positive");
  require(smoothing >= 0.0, "laplace_smoothed: smoothing must be nonnegative");
  const double s2 = smoothing * smoothing;
  Potential p;
  if (smoothing == 0.0) {
    p = {[=](double x) { return std::abs(x) / scale; },
         [=](double x) { return static_cast<double>((x > 0.0) - (x < 0.0)) / scale; },
         [](double) { return 0.0; }};
  } else {
    p = {[=](double x) { return std::sqrt(x * x + s2) / scale; },
         [=](double x) { return x / (scale * std::sqrt(x * x + s2)); },
         [=](double x) {
           const double r = std::sqrt(x * x + s2);
           return s2 / (scale * r * r * r);
         }};
  }
  return build({Family::laplace_smoothed, {scale, smoothing}}, std::move(p), 0.0,
               scale + smoothing, opts);
}

ReferenceMeasure ReferenceMeasure::logistic(double scale, MeasureOptions opts) {
  require(scale > 0.0, "logistic: scale must be positive");
  Potential p{[=](double x) {
                const double z = std::abs(x) / scale;
                return z + 2.0 * std::log1p(std::exp(-z));
              },
              [=](double x) { return std::tanh(0.5 * x / scale) / scale; },
              [=](double x) {
                const double c = std::cosh(0.5 * x / scale);
                return 1.0 / (2.0 * scale * scale * c * c);
              }};
  return build({Family::logistic, {scale}}, std::move(p), 0.0, scale, opts);
}

ReferenceMeasure ReferenceMeasure::interp_curvature(double k_left, double k_right, double width,
                                                    MeasureOptions opts) {
  require(k_left > 0.0 && k_right > 0.0, "interp_curvature: curvatures must be positive");
  require(width > 0.0, "interp_curvature: width must be positive");
  const double dk = k_right - k_left;
  // V'' = k_left + dk * Phi(x/w), integrated twice in closed form.
  Potential p{[=](double x) {
                const double z = x / width;
                return 0.5 * k_left * x * x +
                       0.5 * dk * width * width * ((z * z + 1.0) * normal_cdf(z) + z * normal_pdf(z));
              },
              [=](double x) {
                const double z = x / width;
                return k_left * x + dk * width * (z * normal_cdf(z) + normal_pdf(z));
              },
              [=](double x) { return k_left + dk * normal_cdf(x / width); }};
  const double scale = 1.0 / std::sqrt(std::min(k_left, k_right)) + width;
  return build({Family::interp_curvature, {k_left, k_right, width}}, std::move(p), 0.0, scale,
               opts);
}

ReferenceMeasure ReferenceMeasure::custom(std::vector<double> xs, std::vector<double> vs,
                                          MeasureOptions opts) {
  auto spline = std::make_shared<CubicSpline>(std::move(xs), std::move(vs));
  Potential p{[spline](double x) { return spline->eval(x, 0); },
              [spline](double x) { return spline->eval(x, 1); },
              [spline](double x) { return spline->eval(x, 2); }};
  if (!opts.support) opts.support = std::make_pair(spline->front(), spline->back());
  if (opts.support->first < spline->front() || opts.support->second > spline->back())
    throw DomainError("custom: support exceeds the potential table");
  return build({Family::custom, {}}, std::move(p), 0.0, 1.0, opts);
}

ReferenceMeasure ReferenceMeasure::from_tag(const FamilyTag& tag, MeasureOptions opts) {
  const auto& p = tag.params;
  auto need = [&](std::size_t n) {
    if (p.size() != n) throw DomainError(to_string(tag.family) + ": expected " + std::to_string(n) + " parameters");
  };
  switch (tag.family) {
    case Family::gaussian: need(2); return gaussian(p[0], p[1], opts);
    case Family::laplace_smoothed: need(2); return laplace_smoothed(p[0], p[1], opts);
    case Family::logistic: need(1); return logistic(p[0], opts);
    case Family::interp_curvature: need(3); return interp_curvature(p[0], p[1], p[2], opts);
    case Family::custom: break;
  }
  throw ContractError("from_tag: custom potentials need their table");
}

std::size_t ReferenceMeasure::cell_of(double x) const {
  const double pos = (x - data_->lo) / data_->h;
  const auto last = static_cast<std::size_t>(data_->nodes.size() - 2);
  if (!(pos > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(pos), last);
}

double ReferenceMeasure::partial_mass(std::size_t cell, double x) const {
  const auto& V = data_->potential.value;
  const double lz = data_->log_z;
  return integrate([&V, lz](double t) { return std::exp(-V(t) - lz); },
                   data_->nodes(static_cast<Eigen::Index>(cell)), x, 0.0, 1e-13);
}

double ReferenceMeasure::pdf(double x) const {
  if (!contains(x)) {
    std::ostringstream msg;
    msg << "pdf: x = " << x << " outside support [" << lo() << ", " << hi() << "]";
    throw DomainError(msg.str());
  }
  return density(x);
}

double ReferenceMeasure::cdf(double x) const {
  if (x <= lo()) return 0.0;
  if (x >= hi()) return 1.0;
  const std::size_t c = cell_of(x);
  return std::min(1.0, data_->cum_lower(static_cast<Eigen::Index>(c)) + partial_mass(c, x));
}

double ReferenceMeasure::survival(double x) const {
  if (x <= lo()) return 1.0;
  if (x >= hi()) return 0.0;
  const std::size_t c = cell_of(x);
  const auto next = static_cast<Eigen::Index>(c + 1);
  const double rest = partial_mass(c, data_->nodes(next)) - partial_mass(c, x);
  return std::min(1.0, data_->cum_upper(next) + std::max(0.0, rest));
}

namespace {

// Safeguarded Newton on [lo, hi] for g increasing (sign = +1) or decreasing (-1).
double invert_in_cell(const std::function<double(double)>& g,
                      const std::function<double(double)>& dg, double lo, double hi,
                      double target_scale) {
  double x = 0.5 * (lo + hi);
  double a = lo, b = hi;
  for (int it = 0; it < 100; ++it) {
    const double gx = g(x);
    if (std::abs(gx) <= 2e-16 * target_scale) return x;
    // maintain bracket: g(a) <= 0 <= g(b) in the increasing orientation
    if (gx < 0.0) a = x; else b = x;
    const double slope = dg(x);
    double next = slope > 0.0 ? x - gx / slope : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - x) <= 1e-15 * (std::abs(x) + 1e-300) || b - a <= 1e-15 * (std::abs(x) + 1.0))
      return next;
    x = next;
  }
  std::ostringstream msg;
  msg << "quantile: root search did not converge in bracket [" << a << ", " << b << "]";
  throw NumericError(msg.str());
}

}  // namespace

double ReferenceMeasure::quantile(double a) const {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("quantile: probability must lie in (0,1)");
  if (a > 0.5) return upper_quantile(1.0 - a);
  const Vector& cum = data_->cum_lower;
  const auto it = std::upper_bound(cum.data(), cum.data() + cum.size(), a);
  std::size_t c = static_cast<std::size_t>(it - cum.data());
  c = std::clamp<std::size_t>(c, 1, static_cast<std::size_t>(cum.size() - 1)) - 1;
  const double base = cum(static_cast<Eigen::Index>(c));
  const double x0 = data_->nodes(static_cast<Eigen::Index>(c));
  return invert_in_cell([&](double x) { return base + partial_mass(c, x) - a; },
                        [&](double x) { return density(x); }, x0, x0 + data_->h, a);
}

double ReferenceMeasure::upper_quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("upper_quantile: probability must lie in (0,1)");
  if (q > 0.5) return quantile(1.0 - q);
  const Vector& cum = data_->cum_upper;  // decreasing
  // first node index with cum_upper < q
  std::size_t j = 0;
  {
    std::size_t lo_i = 0, hi_i = static_cast<std::size_t>(cum.size() - 1);
    while (lo_i < hi_i) {
      const std::size_t mid = (lo_i + hi_i) / 2;
      if (cum(static_cast<Eigen::Index>(mid)) < q) hi_i = mid; else lo_i = mid + 1;
    }
    j = lo_i;
  }
  j = std::clamp<std::size_t>(j, 1, static_cast<std::size_t>(cum.size() - 1));
  const std::size_t c = j - 1;
  const auto next = static_cast<Eigen::Index>(j);
  const double x1 = data_->nodes(next);
  const double base = cum(next);
  const double cell_mass = partial_mass(c, x1);
  // survival(x) - q, decreasing; negate to reuse the increasing-orientation solver
  return invert_in_cell(
      [&](double x) { return -(base + (cell_mass - partial_mass(c, x)) - q); },
      [&](double x) { return density(x); }, x1 - data_->h, x1, q);
}

bool ReferenceMeasure::is_log_concave() const { return kcd_constant(*this).value >= -1e-9; }

CurvatureBound kcd_constant(const ReferenceMeasure& m) {
  double lowest = kInf;
  const Vector& x = m.nodes();
  const double h = m.spacing();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    lowest = std::min(lowest, m.potential_d2(x(i)));
    if (i + 1 < x.size()) lowest = std::min(lowest, m.potential_d2(x(i) + 0.5 * h));
  }
  return {lowest, 0.5 * h};
}

LyapunovExponent lyapunov_exponent(const ReferenceMeasure& m, double x0) {
  if (!m.contains(x0)) throw DomainError("lyapunov_exponent: x0 outside support");
  const double left = m.lo() - x0, right = m.hi() - x0;
  return {std::max(left * left, right * right), m.unbounded_family()};
}

}  // namespace isolab
