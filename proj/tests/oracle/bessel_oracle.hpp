#pragma once

// Test-only reference values: ascending Bessel series evaluated in 50-digit
// binary floating point. Independent of the library's double-precision paths.

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

inline Real series_j(const Real& nu, const Real& x) {
  using boost::multiprecision::pow;
  using boost::multiprecision::abs;
  const Real half = x / 2;
  const Real q = -half * half;
  // 1/Gamma(nu+1) through the reflection formula keeps negative orders finite.
  Real term = pow(half, nu) / boost::math::tgamma(nu + 1);
  Real sum = term;
  for (int k = 1; k < 2000; ++k) {
    term *= q / (Real(k) * (Real(k) + nu));
    sum += term;
    if (k > 5 && abs(term) < Real("1e-60") * abs(sum)) break;
  }
  return sum;
}

/// Y_nu by the connection formula; integer orders are shifted by 1e-20, which
/// still leaves about 30 correct digits at this working precision.
inline Real series_y(Real nu, const Real& x) {
  using boost::multiprecision::cos;
  using boost::multiprecision::round;
  using boost::multiprecision::sin;
  if (nu == round(nu)) nu += Real("1e-20");
  const Real pi = boost::math::constants::pi<Real>();
  return (series_j(nu, x) * cos(nu * pi) - series_j(-nu, x)) / sin(nu * pi);
}

inline double j(double nu, double x) { return static_cast<double>(series_j(Real(nu), Real(x))); }
inline double y(double nu, double x) { return static_cast<double>(series_y(Real(nu), Real(x))); }

}  // namespace oracle
