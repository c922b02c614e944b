#pragma once

// Test-only Green's function of H0 + E on the half-line (Robin condition at 0),
// built from modified Bessel functions:
//   G(x, y) = psi0(min) psiInf(max) / K_{1-nu}(k),  k = sqrt(E), nu = (2-d)/2,
//   psi0(x) = sqrt(s) [K_{1-nu}(k) I_nu(ks) + I_{nu-1}(k) K_nu(ks)],  psiInf(x) = sqrt(s) K_nu(ks),  s = 1+x.

#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

namespace oracle {

struct Green {
  double d;
  double e;

  double nu() const { return (2.0 - d) / 2.0; }
  double k() const { return std::sqrt(e); }

  double psi0(double x) const {
    namespace bm = boost::math;
    const double s = 1.0 + x;
    const double kk = k();
    return std::sqrt(s) * (bm::cyl_bessel_k(1.0 - nu(), kk) * bm::cyl_bessel_i(nu(), kk * s) +
                           bm::cyl_bessel_i(nu() - 1.0, kk) * bm::cyl_bessel_k(nu(), kk * s));
  }
  double psi_inf(double x) const { return std::sqrt(1.0 + x) * boost::math::cyl_bessel_k(nu(), k() * (1.0 + x)); }
  double wronskian() const { return boost::math::cyl_bessel_k(1.0 - nu(), k()); }

  double operator()(double x, double y) const {
    return x < y ? psi0(x) * psi_inf(y) / wronskian() : psi0(y) * psi_inf(x) / wronskian();
  }
  double diagonal(double x) const { return psi0(x) * psi_inf(x) / wronskian(); }
};

/// <f, (H0 + E)^{-1} f> for f supported in [a, b].
inline double resolvent_form(const Green& g, const std::function<double(double)>& f, double a, double b) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto inner = [&](double x) {
    auto lower = [&](double y) { return f(y) * g.psi0(y); };
    return f(x) * g.psi_inf(x) * Rule::integrate(lower, a, x, 8, 1e-11);
  };
  return 2.0 * Rule::integrate(inner, a, b, 8, 1e-10) / g.wronskian();
}

}  // namespace oracle
