#include "isolab/numeric.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace isolab {

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_log_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / kSqrt2));
  if (x > -20.0) return std::log(0.5 * std::erfc(-x / kSqrt2));
  // Mills-ratio series: Phi(x) = phi(x)/|x| * sum_k (-1)^k (2k-1)!! / x^{2k}
  const double z = -x;
  const double inv2 = 1.0 / (z * z);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv2;
    sum += term;
  }
  return -0.5 * z * z - std::log(z) + std::log(kInvSqrt2Pi) + std::log(sum);
}

namespace {

double acklam(double p) {
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw DomainError("normal_quantile: probability outside [0,1]");
  }
  if (p > 0.5) return -normal_quantile(1.0 - p);
  double x = acklam(p);
  // Halley refinement against erfc; two passes reach full double accuracy.
  for (int it = 0; it < 2; ++it) {
    const double e = 0.5 * std::erfc(-x / kSqrt2) - p;
    const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

namespace {

constexpr std::array<double, 8> kXgk{0.991455371120812639206854697526329,
                                     0.949107912342758524526189684047851,
                                     0.864864423359769072789712788640926,
                                     0.741531185599394439863864773280788,
                                     0.586087235467691130294144845693013,
                                     0.405845151377397166906606412076961,
                                     0.207784955007898467600689403773245,
                                     0.0};
constexpr std::array<double, 8> kWgk{0.022935322010529224963732008058970,
                                     0.063092092629978553290700663189204,
                                     0.104790010322250183839876322541518,
                                     0.140653259715525918745189590510238,
                                     0.169004726639267902826583426598550,
                                     0.190350578064785409913256402421014,
                                     0.204432940075298892414161999234649,
                                     0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg{0.129484966168869693270611432679082,
                                    0.279705391489276667901467771423780,
                                    0.381830050505118944950369775488975,
                                    0.417959183673469387755102040816327};

struct KronrodResult {
  double value;
  double error;
};

KronrodResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double s = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

double integrate_rec(const std::function<double(double)>& f, double a, double b,
                     const KronrodResult& whole, double abs_tol, double rel_tol,
                     int depth) {
  if (depth <= 0 || whole.error <= std::max(abs_tol, rel_tol * std::abs(whole.value)))
    return whole.value;
  const double mid = 0.5 * (a + b);
  const KronrodResult left = gk15(f, a, mid);
  const KronrodResult right = gk15(f, mid, b);
  return integrate_rec(f, a, mid, left, 0.5 * abs_tol, rel_tol, depth - 1) +
         integrate_rec(f, mid, b, right, 0.5 * abs_tol, rel_tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, abs_tol, rel_tol, max_depth);
  const KronrodResult whole = gk15(f, a, b);
  const double value = integrate_rec(f, a, b, whole, abs_tol, rel_tol, max_depth);
  if (!std::isfinite(value)) throw NumericError("integrate: non-finite result");
  return value;
}

const GaussLegendre& GaussLegendre::rule(int n) {
  static const GaussLegendre four{
      {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
      {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538}};
  static const GaussLegendre eight{
      {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
       0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363},
      {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
       0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763}};
  if (n == 4) return four;
  if (n == 8) return eight;
  throw DomainError("GaussLegendre: only 4- and 8-point rules are tabulated");
}

double bracketed_root(const std::function<double(double)>& f, double lo, double hi,
                      double x_tol, double f_tol, int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    std::ostringstream msg;
    msg << "bracketed_root: no sign change on [" << lo << ", " << hi << "] (f = " << flo
        << ", " << fhi << ")";
    throw NumericError(msg.str());
  }
  int side = 0;  // which end was kept last time
  for (int it = 0; it < max_iter && hi - lo > x_tol; ++it) {
    double x;
    if (std::isfinite(flo) && std::isfinite(fhi)) {
      x = (lo * fhi - hi * flo) / (fhi - flo);
      if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    } else {
      x = 0.5 * (lo + hi);
    }
    const double fx = f(x);
    if (fx == 0.0 || std::abs(fx) <= f_tol) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double x_tol, int max_iter) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    std::ostringstream msg;
    msg << "bisect: no sign change on [" << lo << ", " << hi << "] (f = " << flo
        << ", " << fhi << ")";
    throw NumericError(msg.str());
  }
  for (int it = 0; it < max_iter && hi - lo > x_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ScalarOptimum golden_minimize(const std::function<double(double)>& f, double lo,
                              double hi, double x_tol, int max_iter) {
  constexpr double invphi = 0.61803398874989484820;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && b - a > x_tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? ScalarOptimum{c, fc} : ScalarOptimum{d, fd};
}

unsigned worker_count() {
  if (const char* env = std::getenv("ISO_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace isolab
