#pragma once

// Radial potentials V(x) >= 0 with power-law envelope c_lower/(1+x)^gamma <= V <= c_upper/(1+x)^gamma.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "weaktree/errors.hpp"

namespace weaktree {

class PotentialSpec {
 public:
  enum class Form { ExactPower, Table };

  /// V(x) = c / (1+x)^gamma.
  static PotentialSpec exact_power(double c, double gamma) {
    detail::require(std::isfinite(c) && c > 0.0, "potential constant must be positive");
    check_gamma(gamma);
    PotentialSpec v;
    v.form_ = Form::ExactPower;
    v.gamma_ = gamma;
    v.c_lower_ = c;
    v.c_upper_ = c;
    return v;
  }

  /// Piecewise-linear interpolation of samples; zero beyond the last sample.
  /// The envelope constants are declared by the caller and checked at the nodes.
  static PotentialSpec table(std::vector<double> x, std::vector<double> values, double gamma,
                             double c_lower, double c_upper) {
    check_gamma(gamma);
    detail::require(c_lower > 0.0 && c_lower <= c_upper, "need 0 < c_lower <= c_upper");
    detail::require(x.size() >= 2 && x.size() == values.size(), "table needs matching x and V samples");
    detail::require(x.front() >= 0.0, "table abscissae must be non-negative");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i > 0) detail::require(x[i] > x[i - 1], "table abscissae must increase strictly");
      detail::require(values[i] >= 0.0 && std::isfinite(values[i]), "table values must be finite and non-negative");
      const double cap = c_upper * std::pow(1.0 + x[i], -gamma);
      detail::require(values[i] <= cap * (1.0 + 1e-12), "table value exceeds the upper envelope");
    }
    PotentialSpec v;
    v.form_ = Form::Table;
    v.gamma_ = gamma;
    v.c_lower_ = c_lower;
    v.c_upper_ = c_upper;
    v.x_ = std::move(x);
    v.v_ = std::move(values);
    return v;
  }

  double operator()(double x) const {
    if (form_ == Form::ExactPower) return c_lower_ * std::pow(1.0 + x, -gamma_);
    if (x < x_.front() || x > x_.back()) return 0.0;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.end()) return v_.back();
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double t = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return (1.0 - t) * v_[i - 1] + t * v_[i];
  }

  Form form() const { return form_; }
  double gamma() const { return gamma_; }
  double c_lower() const { return c_lower_; }
  double c_upper() const { return c_upper_; }

  /// Right end of the support; infinite for the exact power law.
  double support_end() const {
    return form_ == Form::ExactPower ? std::numeric_limits<double>::infinity() : x_.back();
  }

  /// Interior points where V is not smooth (table nodes); quadrature panels break there.
  const std::vector<double>& kinks() const { return x_; }

 private:
  static void check_gamma(double gamma) {
    detail::require(gamma > 1.0 && gamma <= 2.0, "decay exponent gamma must lie in (1, 2]");
  }

  Form form_ = Form::ExactPower;
  double gamma_ = 1.5;
  double c_lower_ = 1.0;
  double c_upper_ = 1.0;
  std::vector<double> x_;
  std::vector<double> v_;
};

/// Parameter check for the weak-coupling theorem regime: 1 < gamma <= d <= 2, gamma != 2.
inline void require_theorem_regime(double d, double gamma) {
  detail::require(d > 1.0 && d <= 2.0, "dimension d must lie in (1, 2]");
  detail::require(gamma != 2.0, "excluded case gamma = 2 (need gamma != 2)");
  detail::require(gamma > 1.0 && gamma <= d, "need 1 < gamma <= d");
}

}  // namespace weaktree
