#include "isolab/typical.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <random>

namespace isolab {

namespace {

double gaussian_log_pdf(const GaussianLaw& g, double x) {
  const double z = (x - g.mean) / g.sd;
  return -0.5 * z * z - std::log(g.sd) - 0.5 * std::log(2.0 * kPi);
}

// ln (d mu / d nu) at the nodes of nu
Vector log_ratio_on_grid(const TargetLaw& mu, const ReferenceMeasure& nu) {
  const Vector& x = nu.nodes();
  Vector z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) z(i) = info_density(mu, nu, x(i));
  return z;
}

double log_sum_weighted(const Vector& w, const Vector& a) {
  double top = -kInf;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (w(i) > 0.0) top = std::max(top, a(i));
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (w(i) > 0.0) s += w(i) * std::exp(a(i) - top);
  return top + std::log(s);
}

double cgf_on_grid(const ReferenceMeasure& nu, const Vector& z, double lambda) {
  if (lambda == 0.0) return 0.0;
  Vector a(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    a(i) = std::isfinite(z(i)) ? lambda * z(i) : (lambda > 0.0 ? -kInf : kInf);
  return log_sum_weighted(nu.node_weights(), a) - log_sum_weighted(nu.node_weights(), Vector::Zero(z.size()));
}

struct Legendre {
  double value;
  double lambda;
  bool flagged;
};

// sup over lambda in [lo, hi] of lambda t - cgf(lambda)
Legendre legendre(const ReferenceMeasure& nu, const Vector& z, double t, double lo, double hi) {
  const int cells = 160;
  const double step = (hi - lo) / cells;
  bool flagged = false;
  auto objective = [&](double l) {
    const double c = cgf_on_grid(nu, z, l);
    if (!std::isfinite(c)) {
      flagged = true;
      return -kInf;
    }
    return l * t - c;
  };
  int arg = 0;
  double best = -kInf;
  for (int k = 0; k <= cells; ++k) {
    const double v = objective(lo + step * k);
    if (v > best) {
      best = v;
      arg = k;
    }
  }
  if (arg == 0 || arg == cells) {
    if (arg == cells) flagged = true;  // optimizer may lie past the window
    return {std::max(best, 0.0), lo + step * arg, flagged};
  }
  const ScalarOptimum opt = golden_minimize([&](double l) { return -objective(l); },
                                            lo + step * (arg - 1), lo + step * (arg + 1), 1e-10);
  if (-opt.value > best) return {std::max(-opt.value, 0.0), opt.x, flagged};
  return {std::max(best, 0.0), lo + step * arg, flagged};
}

constexpr double kLambdaWindow = 8.0;

}  // namespace

double info_density(const TargetLaw& mu, const ReferenceMeasure& nu, double x) {
  if (!nu.contains(x)) throw DomainError("info_density: x outside support");
  if (const auto* g = std::get_if<GaussianLaw>(&mu)) {
    const double q = nu.pdf(x);
    if (!(q > 0.0)) return kInf;
    return gaussian_log_pdf(*g, x) - std::log(q);
  }
  const double r = std::get<GridDensity>(mu).at(x);
  return r > 0.0 ? std::log(r) : -kInf;
}

double target_entropy(const TargetLaw& mu, const ReferenceMeasure& nu) {
  const Vector z = log_ratio_on_grid(mu, nu);
  const Vector& w = nu.node_weights();
  double mass = 0.0, acc = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z(i))) continue;
    const double r = std::exp(z(i));
    mass += w(i) * r;
    acc += w(i) * r * z(i);
  }
  // renormalize for the part of mu outside the truncated support
  return acc / mass + std::log(1.0 / mass);
}

double information_cgf(const TargetLaw& mu, const ReferenceMeasure& nu, double lambda) {
  return cgf_on_grid(nu, log_ratio_on_grid(mu, nu), lambda);
}

CramerRate cramer_rate(const TargetLaw& mu, const ReferenceMeasure& nu, double eps, bool one_sided) {
  if (!(eps >= 0.0)) throw DomainError("cramer_exponent: eps must be nonnegative");
  const Vector z = log_ratio_on_grid(mu, nu);
  const double d = target_entropy(mu, nu);
  // mean of the information density under nu
  double centre = 0.0;
  const Vector& w = nu.node_weights();
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (w(i) <= 0.0) continue;
    if (!std::isfinite(z(i))) {
      centre = -kInf;
      break;
    }
    centre += w(i) * z(i);
  }
  const double lower = d - eps, upper = d + eps;
  if (centre >= lower && (one_sided || centre <= upper)) return {0.0, 0.0, lower, false};

  // the nearer endpoint binds; the far one has the larger rate
  if (centre < lower) {
    const Legendre up = legendre(nu, z, lower, 0.0, kLambdaWindow);
    return {up.value, up.lambda, lower, up.flagged};
  }
  const Legendre down = legendre(nu, z, upper, -kLambdaWindow, 0.0);
  return {down.value, down.lambda, upper, down.flagged};
}

double cramer_exponent(const TargetLaw& mu, const ReferenceMeasure& nu, double eps, bool one_sided) {
  return cramer_rate(mu, nu, eps, one_sided).rate;
}

std::optional<double> exact_gaussian_exponent(const TypicalSetSpec& spec) {
  const auto* g = std::get_if<GaussianLaw>(&spec.mu);
  if (!g || spec.nu.family().family != Family::gaussian) return std::nullopt;
  const double m0 = spec.nu.family().params[0], s0 = std::sqrt(spec.nu.family().params[1]);
  if (std::abs(g->sd - s0) > 1e-12 * s0) return std::nullopt;
  const double delta = std::abs(g->mean - m0) / s0;
  const double n = spec.n;
  if (delta == 0.0) return 0.0;
  const double c = delta - spec.eps / delta;
  const double la = normal_log_cdf(-std::sqrt(n) * c);
  if (spec.one_sided) return -la / n;
  const double lb = normal_log_cdf(-std::sqrt(n) * (delta + spec.eps / delta));
  return -(la + std::log1p(-std::exp(lb - la))) / n;
}

namespace {

// Draws from nu tilted by (d mu / d nu)^lambda, with its log density.
class TiltedSampler {
 public:
  TiltedSampler(const TypicalSetSpec& spec, double lambda) : nu_(spec.nu) {
    const auto* g = std::get_if<GaussianLaw>(&spec.mu);
    if (g && nu_.family().family == Family::gaussian) {
      const double m0 = nu_.family().params[0], v0 = nu_.family().params[1];
      const double prec = lambda / (g->sd * g->sd) + (1.0 - lambda) / v0;
      gaussian_ = GaussianLaw{(lambda * g->mean / (g->sd * g->sd) + (1.0 - lambda) * m0 / v0) / prec,
                              1.0 / std::sqrt(prec)};
      return;
    }
    const Vector z = log_ratio_on_grid(spec.mu, nu_);
    const Vector& pdf = nu_.node_pdf();
    Vector g_node(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i)
      g_node(i) = std::isfinite(z(i)) ? pdf(i) * std::exp(lambda * z(i)) : 0.0;
    const double h = nu_.spacing();
    cell_mass_.resize(static_cast<std::size_t>(z.size() - 1));
    double total = 0.0;
    for (std::size_t i = 0; i < cell_mass_.size(); ++i) {
      cell_mass_[i] = 0.5 * h * (g_node(static_cast<Eigen::Index>(i)) + g_node(static_cast<Eigen::Index>(i) + 1));
      total += cell_mass_[i];
    }
    for (double& c : cell_mass_) c /= total;
    cells_ = std::discrete_distribution<std::size_t>(cell_mass_.begin(), cell_mass_.end());
  }

  // x and ln q(x)
  std::pair<double, double> draw(std::mt19937_64& rng) {
    if (gaussian_) {
      const double x = gaussian_->mean + gaussian_->sd * normal_(rng);
      return {x, gaussian_log_pdf(*gaussian_, x)};
    }
    const std::size_t cell = cells_(rng);
    const double h = nu_.spacing();
    const double x = nu_.lo() + h * (static_cast<double>(cell) + unit_(rng));
    return {x, std::log(cell_mass_[cell] / h)};
  }

 private:
  const ReferenceMeasure& nu_;
  std::optional<GaussianLaw> gaussian_;
  std::vector<double> cell_mass_;
  std::discrete_distribution<std::size_t> cells_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> unit_;
};

struct Welford {
  double count = 0.0, mean = 0.0, m2 = 0.0;
  double sum = 0.0, sum_sq = 0.0;

  void add(double y) {
    count += 1.0;
    const double delta = y - mean;
    mean += delta / count;
    m2 += delta * (y - mean);
    sum += y;
    sum_sq += y * y;
  }

  void merge(const Welford& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * o.count / total;
    m2 += o.m2 + delta * delta * count * o.count / total;
    count = total;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
};

constexpr std::size_t kChunk = 1000;

}  // namespace

ExponentEstimate mc_measure(const TypicalSetSpec& spec, std::size_t samples, std::uint64_t seed) {
  if (spec.n < 1) throw DomainError("mc_measure: n must be positive");
  if (samples < 2) throw DomainError("mc_measure: need at least two samples");
  const CramerRate rate = cramer_rate(spec.mu, spec.nu, spec.eps, spec.one_sided);
  const double lambda = std::clamp(rate.lambda, 0.0, 1.0);
  const double d = target_entropy(spec.mu, spec.nu);
  const double lower = d - spec.eps, upper = d + spec.eps;
  const double n = spec.n;
  // weights are carried as w e^{n rate} to stay representable
  const double shift = n * rate.rate;

  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<Welford> acc(chunks);
  parallel_for(chunks, [&](std::size_t k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    TiltedSampler sampler(spec, lambda);
    const std::size_t count = std::min(kChunk, samples - k * kChunk);
    for (std::size_t s = 0; s < count; ++s) {
      double info = 0.0, log_w = 0.0;
      bool inside = true;
      for (int j = 0; j < spec.n; ++j) {
        const auto [x, log_q] = sampler.draw(rng);
        if (!spec.nu.contains(x)) {
          inside = false;
          continue;
        }
        info += info_density(spec.mu, spec.nu, x);
        log_w += std::log(spec.nu.pdf(x)) - log_q;
      }
      const double mean_info = info / n;
      const bool hit = inside && mean_info >= lower && (spec.one_sided || mean_info <= upper);
      acc[k].add(hit ? std::exp(log_w + shift) : 0.0);
    }
  });
  Welford total;
  for (const Welford& w : acc) total.merge(w);

  ExponentEstimate out{};
  out.samples = samples;
  out.seed = seed;
  out.lambda = lambda;
  out.exact = exact_gaussian_exponent(spec);
  out.effective_samples = total.sum_sq > 0.0 ? total.sum * total.sum / total.sum_sq : 0.0;
  out.unreliable = out.effective_samples < 100.0;
  if (!(total.mean > 0.0)) {
    out.point = out.ci_low = out.ci_high = kInf;
    return out;
  }
  out.point = (shift - std::log(total.mean)) / n;
  const double se = std::sqrt(total.m2 / (total.count - 1.0) / total.count) / (total.mean * n);
  out.ci_low = out.point - 1.959963984540054 * se;
  out.ci_high = out.point + 1.959963984540054 * se;
  return out;
}

HalfspaceLdp gaussian_halfspace_ldp(double b, double eps, long n, double tau) {
  if (!(b > 0.0)) throw DomainError("gaussian_halfspace_ldp: b must be positive");
  if (!(eps >= 0.0) || !(tau > 0.0) || n < 1) throw DomainError("gaussian_halfspace_ldp: bad eps, tau or n");
  const double c = b - eps / b, r = std::sqrt(tau);
  if (!(c >= r)) throw DomainError("gaussian_halfspace_ldp: need b - eps/b >= sqrt(tau)");
  const double sn = std::sqrt(static_cast<double>(n));
  HalfspaceLdp out{};
  out.alpha_n = -normal_log_cdf(-sn * c) / static_cast<double>(n);
  out.alpha_enlarged_n = -normal_log_cdf(-sn * (c - r)) / static_cast<double>(n);
  out.ratio = (out.alpha_n - out.alpha_enlarged_n) / r;
  const double alpha = 0.5 * c * c;
  out.limit_prediction = std::sqrt(2.0 * alpha) - 0.5 * r;
  out.deviation = out.ratio - out.limit_prediction;
  return out;
}

double extrapolate_halfspace_ratio(double b, double eps, long n, const std::vector<double>& taus) {
  if (taus.size() < 2) throw DomainError("extrapolate_halfspace_ratio: need two or more taus");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(taus.size()), 2);
  Vector y(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double tau = taus[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = std::sqrt(tau);
    y(i) = gaussian_halfspace_ldp(b, eps, n, tau).ratio;
  }
  return a.colPivHouseholderQr().solve(y)(0);
}

std::pair<TypicalSetSpec, TypicalSetSpec> product_typical_spec(double lambda_star,
                                                               const TargetLaw& mu1,
                                                               const TargetLaw& mu2,
                                                               const ReferenceMeasure& nu, int n,
                                                               double eps) {
  if (!(lambda_star > 0.0 && lambda_star < 1.0))
    throw DomainError("product_typical_spec: lambda must lie in (0,1)");
  if (!(eps >= 0.0)) throw DomainError("product_typical_spec: eps must be nonnegative");
  const int n1 = static_cast<int>(std::floor(n * lambda_star + 1e-9));
  const int n2 = static_cast<int>(std::ceil(n * (1.0 - lambda_star) - 1e-9));
  if (n * lambda_star < 1.0 - 1e-9 || n * (1.0 - lambda_star) < 1.0 - 1e-9 || n1 < 1 || n2 < 1)
    throw ContractError("product_typical_spec: both n lambda and n (1 - lambda) must be at least 1");
  return {TypicalSetSpec{mu1, nu, n1, eps, true}, TypicalSetSpec{mu2, nu, n2, eps, true}};
}

double product_exponent(const std::pair<TypicalSetSpec, TypicalSetSpec>& blocks) {
  const auto& [a, b] = blocks;
  const double ra = cramer_exponent(a.mu, a.nu, a.eps, a.one_sided);
  const double rb = cramer_exponent(b.mu, b.nu, b.eps, b.one_sided);
  return (a.n * ra + b.n * rb) / static_cast<double>(a.n + b.n);
}

}  // namespace isolab
