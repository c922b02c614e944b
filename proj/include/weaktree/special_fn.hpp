#pragma once

// Real-order Bessel functions of the first and second kind, the Gamma and
// Lambert-W functions, and the Fourier-Bessel kernel f_d(p, x).
//
// Bessel evaluation uses two regimes:
//   * argument < 12: ascending power series; Y_nu from the connection
//     formula (non-integer order) or the logarithmic series (integer order).
//   * argument >= 12 * max(1, nu^2): Hankel asymptotic expansion.
// For |nu| > 1 and arguments in between, the three-term recurrence is run
// upward in |nu| from the two nearest orders in [-1, 1].
// Orders within 1e-6 of an integer (but not equal to it) take Y from a
// linear interpolation between nu = n - 1e-6 and nu = n + 1e-6; accuracy in
// that band is about 1e-8 instead of 1e-10. The connection formula runs in
// long double within 1e-3 of an integer order.

#include <cmath>
#include <limits>
#include <numbers>

#include "weaktree/errors.hpp"

namespace weaktree {

/// Real order of a Bessel function.
struct BesselOrder {
  double nu;
  constexpr explicit BesselOrder(double value) : nu(value) {}
};

/// Arguments of the kernel f_d(p, x): spectral variable p, spatial variable x, dimension d.
struct KernelPoint {
  double p;
  double x;
  double d;
};

struct BesselPair {
  double j;
  double y;
};

/// A value together with a flag telling that the argument is so large that
/// the phase of the oscillation is no longer resolved by double precision.
struct CheckedValue {
  double value;
  bool accuracy_loss;
};

namespace special {

inline constexpr double kSeriesLimit = 12.0;
inline constexpr double kIntegerBand = 1e-6;
inline constexpr double kAccuracyLossArgument = 1e8;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

namespace detail {

/// sin(pi x) and cos(pi x) with argument reduction done on x, not on pi x.
inline void sincospi(double x, double& s, double& c) {
  const double n = std::nearbyint(x);
  const double r = x - n;
  const double sign = (static_cast<long long>(n) % 2 == 0) ? 1.0 : -1.0;
  s = sign * std::sin(std::numbers::pi * r);
  c = sign * std::cos(std::numbers::pi * r);
}

inline bool is_integer(double nu) { return nu == std::nearbyint(nu); }

/// Ascending series for J_nu(x), x >= 0, in working precision T.
template <typename T>
T series_j_t(T nu, T x) {
  using std::abs;
  if (nu < 0 && nu == std::nearbyint(nu)) {
    const auto n = static_cast<long long>(-nu);
    const T value = series_j_t<T>(-nu, x);
    return (n % 2 == 0) ? value : -value;
  }
  if (x == 0) {
    if (nu == 0) return T(1);
    if (nu > 0) return T(0);
    throw DomainError("bessel_j: J_nu(0) is unbounded for negative non-integer order");
  }
  const T half = x / 2;
  const T q = -half * half;
  const T arg = nu + 1;
  T term = (arg <= 0 && arg == std::nearbyint(arg)) ? T(0) : std::pow(half, nu) / std::tgamma(arg);
  T sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * (k + nu));
    sum += term;
    if (k > half && abs(term) <= T(1e-17) * abs(sum)) break;
  }
  return sum;
}

inline double series_j(double nu, double x) { return series_j_t<double>(nu, x); }

/// Logarithmic series for Y_n(x), integer n >= 0, x > 0.
inline double series_y_integer(int n, double x) {
  const double half = 0.5 * x;
  const double q = -half * half;
  const double log_half = std::log(half);

  double finite = 0.0;
  if (n > 0) {
    // sum_{k<n} (n-k-1)!/k! (x/2)^{2k-n}
    double factorial_ratio = std::tgamma(static_cast<double>(n));  // (n-1)!/0!
    double power = std::pow(half, -n);
    for (int k = 0; k < n; ++k) {
      finite += factorial_ratio * power;
      if (k + 1 < n) {
        factorial_ratio /= static_cast<double>((n - k - 1) * (k + 1));
        power *= half * half;
      }
    }
  }

  // psi(k+1) + psi(n+k+1) = -2 gamma_E + H_k + H_{n+k}
  double h_k = 0.0;
  double h_nk = 0.0;
  for (int m = 1; m <= n; ++m) h_nk += 1.0 / m;
  double term = std::pow(half, n) / std::tgamma(static_cast<double>(n + 1));
  double sum = term * (-2.0 * kEulerGamma + h_k + h_nk);
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * (n + k));
    h_k += 1.0 / k;
    h_nk += 1.0 / (n + k);
    const double contribution = term * (-2.0 * kEulerGamma + h_k + h_nk);
    sum += contribution;
    if (k > half && std::abs(contribution) <= 1e-17 * std::abs(sum)) break;
  }

  const double jn = series_j(n, x);
  return (2.0 / std::numbers::pi) * jn * log_half - finite / std::numbers::pi -
         sum / std::numbers::pi;
}

/// Hankel asymptotic expansion of (J_nu, Y_nu) for large x.
inline BesselPair hankel_asymptotic(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) >= previous && k > 2) break;  // asymptotic series starts to diverge
    term = next;
    previous = std::abs(term);
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
    if (std::abs(term) < 1e-17) break;
  }
  double sc = 0.0;
  double cc = 0.0;
  sincospi(0.5 * nu + 0.25, sc, cc);
  const double sx = std::sin(x);
  const double cx = std::cos(x);
  const double cos_chi = cx * cc + sx * sc;
  const double sin_chi = sx * cc - cx * sc;
  const double amplitude = std::sqrt(2.0 / (std::numbers::pi * x));
  return {amplitude * (p * cos_chi - q * sin_chi), amplitude * (p * sin_chi + q * cos_chi)};
}

/// Y_nu by the connection formula, nu not an integer. Orders close to an
/// integer lose digits to the 1/sin(nu pi) factor, so they run in long double.
inline double connection_y(double nu, double x) {
  if (std::abs(nu - std::nearbyint(nu)) < 1e-3) {
    using Wide = long double;
    const Wide pi_w = 3.141592653589793238462643383279502884L;
    const Wide n = std::nearbyint(static_cast<Wide>(nu));
    const Wide r = static_cast<Wide>(nu) - n;
    const Wide sign = (static_cast<long long>(n) % 2 == 0) ? 1.0L : -1.0L;
    const Wide sw = sign * std::sin(pi_w * r);
    const Wide cw = sign * std::cos(pi_w * r);
    const Wide jp = series_j_t<Wide>(nu, x);
    const Wide jm = series_j_t<Wide>(-static_cast<Wide>(nu), x);
    return static_cast<double>((jp * cw - jm) / sw);
  }
  double s = 0.0;
  double c = 0.0;
  sincospi(nu, s, c);
  return (series_j(nu, x) * c - series_j(-nu, x)) / s;
}

inline BesselPair series_jy(double nu, double x) {
  const double j = series_j(nu, x);
  const double n = std::nearbyint(nu);
  const double distance = std::abs(nu - n);
  if (distance == 0.0) {
    const int order = static_cast<int>(std::abs(n));
    const double y = series_y_integer(order, x);
    return {j, (n < 0.0 && order % 2 == 1) ? -y : y};
  }
  if (distance < kIntegerBand) {
    const double lo = n - kIntegerBand;
    const double hi = n + kIntegerBand;
    const double y_lo = connection_y(lo, x);
    const double y_hi = connection_y(hi, x);
    const double t = (nu - lo) / (hi - lo);
    return {j, (1.0 - t) * y_lo + t * y_hi};
  }
  return {j, connection_y(nu, x)};
}

inline bool use_asymptotic(double nu, double x) {
  return x >= kSeriesLimit * std::max(1.0, nu * nu);
}

}  // namespace detail

/// J_nu(x) and Y_nu(x) together, x > 0.
inline BesselPair bessel_jy(BesselOrder order, double x) {
  const double nu = order.nu;
  if (!std::isfinite(nu)) throw DomainError("bessel: order must be finite");
  if (!(x > 0.0)) throw DomainError("bessel_jy: argument must be positive");
  if (detail::use_asymptotic(nu, x)) return detail::hankel_asymptotic(nu, x);
  if (x < kSeriesLimit || std::abs(nu) <= 1.0) return detail::series_jy(nu, x);

  // 12 <= x < 12 nu^2 with |nu| > 1: recurrence from orders inside [-1, 1],
  // which is stable here because x exceeds the order.
  if (nu > 0.0) {
    const double m = std::floor(nu);
    double mu = nu - m;  // [0, 1)
    BesselPair lower = detail::hankel_asymptotic(mu - 1.0, x);
    BesselPair current = detail::hankel_asymptotic(mu, x);
    while (mu < nu - 0.5) {
      const double f = 2.0 * mu / x;
      const BesselPair next{f * current.j - lower.j, f * current.y - lower.y};
      lower = current;
      current = next;
      mu += 1.0;
    }
    return current;
  }
  const double m = std::floor(-nu);
  double mu = nu + m;  // (-1, 0]
  BesselPair upper = detail::hankel_asymptotic(mu + 1.0, x);
  BesselPair current = detail::hankel_asymptotic(mu, x);
  while (mu > nu + 0.5) {
    const double f = 2.0 * mu / x;
    const BesselPair next{f * current.j - upper.j, f * current.y - upper.y};
    upper = current;
    current = next;
    mu -= 1.0;
  }
  return current;
}

inline CheckedValue bessel_j_checked(BesselOrder order, double x) {
  if (std::isnan(x) || x < 0.0) throw DomainError("bessel_j: argument must be non-negative");
  if (x == 0.0) return {detail::series_j(order.nu, 0.0), false};
  return {bessel_jy(order, x).j, x > kAccuracyLossArgument};
}

inline CheckedValue bessel_y_checked(BesselOrder order, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_y: argument must be positive");
  return {bessel_jy(order, x).y, x > kAccuracyLossArgument};
}

/// Bessel function of the first kind J_nu(x), x >= 0 (x = 0 requires nu >= 0 or integer nu).
inline double bessel_j(BesselOrder order, double x) { return bessel_j_checked(order, x).value; }

/// Bessel function of the second kind Y_nu(x), x > 0.
inline double bessel_y(BesselOrder order, double x) { return bessel_y_checked(order, x).value; }

inline double gamma_fn(double x) {
  if (!(x > 0.0)) throw DomainError("gamma_fn: argument must be positive");
  return std::tgamma(x);
}

/// Principal branch of the Lambert W function on [0, inf): the w >= 0 with w e^w = z.
inline double lambert_w(double z) {
  if (std::isnan(z) || z < 0.0) throw DomainError("lambert_w: argument must be non-negative");
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return z;

  double w = std::log1p(z);
  if (z > 1e100) {
    // w + log w = log z, to keep w e^w inside the double range
    const double log_z = std::log(z);
    for (int i = 0; i < 50; ++i) {
      const double g = w + std::log(w) - log_z;
      const double step = g / (1.0 + 1.0 / w);
      w -= step;
      if (std::abs(g) <= 1e-15 * log_z) break;
    }
    return w;
  }

  for (int i = 0; i < 50; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    if (std::abs(f) <= 1e-14 * z) break;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) break;
  }
  return w;
}

/// f_d(p, .) for a fixed spectral variable p and dimension d.
///
/// f_d(p, x) = [J_{-d/2}(p) Y_{(2-d)/2}(p(1+x)) - Y_{-d/2}(p) J_{(2-d)/2}(p(1+x))]
///             / sqrt(J_{-d/2}(p)^2 + Y_{-d/2}(p)^2)
///
/// The p-dependent coefficients are computed once, so evaluating along x is
/// two Bessel calls per point.
class FdKernel {
 public:
  FdKernel(double p, double d) : p_(p), nu_(0.5 * (2.0 - d)) {
    if (!(p > 0.0)) throw DomainError("fd_kernel: p must be positive");
    if (!(d > 1.0 && d <= 2.0)) throw DomainError("fd_kernel: d must lie in (1, 2]");
    const BesselPair boundary = bessel_jy(BesselOrder{-0.5 * d}, p);
    modulus_ = std::hypot(boundary.j, boundary.y);
    cj_ = boundary.j / modulus_;
    cy_ = boundary.y / modulus_;
  }

  double operator()(double x) const {
    if (std::isnan(x) || x < 0.0) throw DomainError("fd_kernel: x must be non-negative");
    const BesselPair inner = bessel_jy(BesselOrder{nu_}, p_ * (1.0 + x));
    return cj_ * inner.y - cy_ * inner.j;
  }

  double p() const { return p_; }
  double order() const { return nu_; }
  /// sqrt(J_{-d/2}(p)^2 + Y_{-d/2}(p)^2)
  double modulus() const { return modulus_; }
  /// J_{-d/2}(p) / modulus and Y_{-d/2}(p) / modulus: cosine and sine of the phase shift.
  double cos_phase() const { return cj_; }
  double sin_phase() const { return cy_; }

 private:
  double p_;
  double nu_;
  double modulus_ = 0.0;
  double cj_ = 0.0;
  double cy_ = 0.0;
};

inline double fd_kernel(const KernelPoint& pt) { return FdKernel(pt.p, pt.d)(pt.x); }

}  // namespace special

using special::bessel_j;
using special::bessel_jy;
using special::bessel_y;
using special::fd_kernel;
using special::FdKernel;
using special::gamma_fn;
using special::lambert_w;

}  // namespace weaktree
