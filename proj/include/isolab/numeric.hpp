#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace isolab {

using Vector = Eigen::VectorXd;

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Iterative method failed to converge or produced a non-finite value.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Standard normal distribution.
double normal_pdf(double x);
double normal_cdf(double x);
/// log Phi(x), accurate deep into the lower tail.
double normal_log_cdf(double x);
/// Inverse of Phi, relative accuracy ~1e-15 on (0,1).
double normal_quantile(double p);

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a,b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-14, double rel_tol = 1e-12,
                 int max_depth = 40);

/// Gauss-Legendre rule on [-1,1] with n in {4, 8}.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  static const GaussLegendre& rule(int n);
};

/// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double x_tol = 1e-14, int max_iter = 200);

/// Root of f on [lo, hi] by the Illinois variant of regula falsi, falling back
/// to bisection where f is not finite. f(lo) and f(hi) must differ in sign.
double bracketed_root(const std::function<double(double)>& f, double lo, double hi,
                      double x_tol = 1e-14, double f_tol = 0.0, int max_iter = 300);

struct ScalarOptimum {
  double x;
  double value;
};

/// Golden-section minimization of a unimodal function on [lo, hi].
ScalarOptimum golden_minimize(const std::function<double(double)>& f, double lo,
                              double hi, double x_tol = 1e-10,
                              int max_iter = 200);

/// Two-point Richardson extrapolation to h -> 0 assuming error linear in h.
inline double richardson_linear(double h0, double f0, double h1, double f1) {
  return (f1 * h0 - f0 * h1) / (h0 - h1);
}

/// Solves a tridiagonal system in place (Thomas algorithm).
/// sub[i] couples row i to i-1 (sub[0] unused), sup[i] couples i to i+1.
template <typename Derived>
void solve_tridiagonal(const Eigen::MatrixBase<Derived>& sub,
                       const Eigen::MatrixBase<Derived>& diag,
                       const Eigen::MatrixBase<Derived>& sup,
                       Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>& rhs) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = diag.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(n);
  Scalar beta = diag(0);
  if (beta == Scalar(0)) throw NumericError("tridiagonal solve: zero pivot");
  rhs(0) /= beta;
  for (Eigen::Index i = 1; i < n; ++i) {
    c(i - 1) = sup(i - 1) / beta;
    beta = diag(i) - sub(i) * c(i - 1);
    if (beta == Scalar(0)) throw NumericError("tridiagonal solve: zero pivot");
    rhs(i) = (rhs(i) - sub(i) * rhs(i - 1)) / beta;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) rhs(i) -= c(i) * rhs(i + 1);
}

/// Worker count: ISO_LAB_THREADS if set, otherwise hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) over worker_count() threads. Each index is
/// processed exactly once; callers write results into pre-sized slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace isolab
