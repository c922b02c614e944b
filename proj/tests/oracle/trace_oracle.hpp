#pragma once

// Test-only trace oracle: tr Q_E = int V(x) G_E(x, x) dx with the diagonal of
// the Green's function built from Boost's modified Bessel functions. For large
// k(1+x) the product I_nu K_nu is replaced by its asymptotic series and the
// remaining tail of the exact power law is integrated in closed form.

#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

namespace oracle {

struct TraceOracle {
  double d;
  double e;
  double c;
  double gamma;

  double nu() const { return (2.0 - d) / 2.0; }
  double k() const { return std::sqrt(e); }

  double green_diagonal(double x) const {
    namespace bm = boost::math;
    const double s = 1.0 + x;
    const double z = k() * s;
    const double n = nu();
    const double mu = 4.0 * n * n;
    double ik;
    if (z < 400.0) {
      ik = bm::cyl_bessel_i(n, z) * bm::cyl_bessel_k(n, z);
    } else {
      const double w = 1.0 / (2.0 * z);
      ik = w * (1.0 - 0.5 * (mu - 1.0) * w * w + 0.375 * (mu - 1.0) * (mu - 9.0) * w * w * w * w);
    }
    const double reflected = z < 600.0 ? bm::cyl_bessel_i(n - 1.0, k()) * std::pow(bm::cyl_bessel_k(n, z), 2) /
                                             bm::cyl_bessel_k(1.0 - n, k())
                                       : 0.0;
    return s * (ik + reflected);
  }

  double trace() const {
    using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
    const auto integrand = [&](double x) { return c * std::pow(1.0 + x, -gamma) * green_diagonal(x); };
    const double x_end = 800.0 / k() - 1.0;
    double total = 0.0;
    double a = 0.0;
    for (double b = 0.5; a < x_end; b *= 2.0) {
      const double hi = std::min(b, x_end);
      total += Rule::integrate(integrand, a, hi, 12, 1e-12);
      a = hi;
    }
    // tail: G ~ (1/(2k)) (1 - (mu-1)/(8 k^2 s^2))
    const double s = 1.0 + x_end;
    const double mu = 4.0 * nu() * nu();
    total += c / (2.0 * k()) *
             (std::pow(s, 1.0 - gamma) / (gamma - 1.0) -
              (mu - 1.0) / (8.0 * e) * std::pow(s, -1.0 - gamma) / (gamma + 1.0));
    return total;
  }
};

}  // namespace oracle
