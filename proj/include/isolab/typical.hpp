#pragma once

#include "isolab/densities.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>

namespace isolab {

struct GaussianLaw {
  double mean;
  double sd;
};

/// mu as a parametric Gaussian or a density on the grid of nu.
using TargetLaw = std::variant<GaussianLaw, GridDensity>;

struct TypicalSetSpec {
  TargetLaw mu;
  ReferenceMeasure nu;
  int n;
  double eps;
  bool one_sided;
};

/// ln (d mu / d nu)(x); -inf where mu has no mass.
double info_density(const TargetLaw& mu, const ReferenceMeasure& nu, double x);

/// D(mu || nu) by quadrature on the grid of nu.
double target_entropy(const TargetLaw& mu, const ReferenceMeasure& nu);

/// ln int (d mu / d nu)^lambda d nu.
double information_cgf(const TargetLaw& mu, const ReferenceMeasure& nu, double lambda);

struct CramerRate {
  double rate;
  double lambda;      // Legendre maximizer
  double threshold;   // level of the binding deviation
  bool flagged;       // CGF overflowed somewhere on the search window
};

/// Large-deviation rate of nu^n(A) for the typical set at level eps.
CramerRate cramer_rate(const TargetLaw& mu, const ReferenceMeasure& nu, double eps, bool one_sided);
double cramer_exponent(const TargetLaw& mu, const ReferenceMeasure& nu, double eps, bool one_sided);

struct ExponentEstimate {
  double point;
  double ci_low, ci_high;  // 95%
  std::optional<double> exact;
  std::size_t samples;
  std::uint64_t seed;
  double lambda;          // tilt used
  double effective_samples;
  bool unreliable;        // effective sample size below 100
};

/// -(1/n) ln nu^n(A) by importance sampling under the tilted law.
/// Streams are seeded per chunk of 1000 samples, so results do not depend on
/// the thread count.
ExponentEstimate mc_measure(const TypicalSetSpec& spec, std::size_t samples, std::uint64_t seed);

/// -(1/n) ln of the exact half-space probability when mu and nu are Gaussians
/// of equal variance; nullopt otherwise.
std::optional<double> exact_gaussian_exponent(const TypicalSetSpec& spec);

struct HalfspaceLdp {
  double alpha_n;
  double alpha_enlarged_n;
  double ratio;
  double limit_prediction;  // sqrt(2 alpha) - sqrt(tau)/2, alpha = c^2/2
  double deviation;         // ratio - limit_prediction
};

HalfspaceLdp gaussian_halfspace_ldp(double b, double eps, long n, double tau);

/// Intercept of the least-squares line of ratio against sqrt(tau).
double extrapolate_halfspace_ratio(double b, double eps, long n, const std::vector<double>& taus);

/// Block sizes floor(n lambda) and ceil(n (1 - lambda)).
std::pair<TypicalSetSpec, TypicalSetSpec> product_typical_spec(double lambda_star,
                                                               const TargetLaw& mu1,
                                                               const TargetLaw& mu2,
                                                               const ReferenceMeasure& nu, int n,
                                                               double eps);

/// Size-weighted sum of the block rates.
double product_exponent(const std::pair<TypicalSetSpec, TypicalSetSpec>& blocks);

}  // namespace isolab
