#pragma once

// Weak-coupling sweeps, power-law and log-corrected fits, and the closed-form
// variational upper bounds built from e^{-delta x} and hat test functions.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/expint.hpp>

#include "weaktree/birman_schwinger.hpp"
#include "weaktree/errors.hpp"
#include "weaktree/halfline_solver.hpp"
#include "weaktree/potential.hpp"
#include "weaktree/quadrature.hpp"
#include "weaktree/special_fn.hpp"

namespace weaktree {

/// Everything in a half-line problem except the coupling.
struct HalfLineFamily {
  double d = 1.6;
  PotentialSpec potential = PotentialSpec::exact_power(1.0, 1.2);
  double scale = 1.0;
  DiscretizationOptions discretization;
  SolveOptions solve;
};

struct SweepEntry {
  double alpha = 0.0;
  double e1 = std::numeric_limits<double>::quiet_NaN();
  double truncation = 0.0;
  bool converged = false;
  bool truncation_warning = false;
};

enum class Law { Power, LogCorrected };

struct SweepReport {
  std::vector<SweepEntry> entries;
  double fit_exponent = std::numeric_limits<double>::quiet_NaN();
  double fit_intercept = std::numeric_limits<double>::quiet_NaN();
  double fit_residual = std::numeric_limits<double>::quiet_NaN();
  Law law = Law::Power;
};

/// Decreasing grid of n log-spaced couplings from hi down to lo.
inline std::vector<double> alpha_grid(double lo, double hi, std::size_t n) {
  detail::require(lo > 0.0 && hi > lo, "alpha grid needs 0 < lo < hi");
  std::vector<double> a = quad::geomspace(lo, hi, n);
  std::reverse(a.begin(), a.end());
  return a;
}

/// One weighted ground-state solve per coupling. Solver failures leave the entry flagged, not thrown.
inline SweepReport sweep_ground_state(const HalfLineFamily& family, std::span<const double> alphas) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    detail::require(alphas[i] > 0.0 && std::isfinite(alphas[i]), "couplings must be positive");
    detail::require(i == 0 || alphas[i] < alphas[i - 1], "couplings must be strictly decreasing");
  }
  SweepReport report;
  for (double alpha : alphas) {
    SweepEntry entry;
    entry.alpha = alpha;
    const HalfLineProblem p = make_halfline_problem(family.d, alpha, family.potential, family.scale, family.discretization);
    entry.truncation = p.truncation;
    try {
      const SpectralResult r = ground_state_weighted(p, family.solve);
      entry.e1 = r.e1;
      entry.converged = r.converged;
      entry.truncation_warning = r.diagnostics.truncation_warning;
    } catch (const ConvergenceError&) {
      entry.converged = false;
    }
    report.entries.push_back(entry);
  }
  return report;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // max |y - fit|
};

inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) f.residual = std::max(f.residual, std::abs(y[i] - f.intercept - f.slope * x[i]));
  return f;
}

namespace asym_detail {

/// Converged entries with e1 < 0, minus the largest and smallest coupling.
inline std::vector<SweepEntry> fit_window(const SweepReport& report) {
  std::vector<SweepEntry> usable;
  for (const SweepEntry& e : report.entries) {
    if (e.converged && e.e1 < 0.0) usable.push_back(e);
  }
  if (usable.size() < 5) throw InsufficientDataError("fit needs at least 5 converged entries with e1 < 0");
  std::sort(usable.begin(), usable.end(), [](const SweepEntry& a, const SweepEntry& b) { return a.alpha > b.alpha; });
  return {usable.begin() + 1, usable.end() - 1};
}

}  // namespace asym_detail

struct PowerFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

/// Slope of log|e1| against log(alpha).
inline PowerFit fit_power_law(const SweepReport& report) {
  const auto window = asym_detail::fit_window(report);
  std::vector<double> x, y;
  for (const SweepEntry& e : window) {
    x.push_back(std::log(e.alpha));
    y.push_back(std::log(-e.e1));
  }
  const LineFit f = least_squares(x, y);
  return {f.slope, f.intercept, f.residual};
}

struct LogCorrectedFit {
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double exponent = 0.0;  // free slope of log|e1| against log|alpha log alpha|
  double residual = 0.0;
};

/// r(alpha) = |e1| / |alpha log alpha|^{2/(2-gamma)} over the fit window.
inline LogCorrectedFit fit_log_corrected(const SweepReport& report, double gamma) {
  detail::require(gamma > 1.0 && gamma < 2.0, "log-corrected law needs 1 < gamma < 2");
  for (const SweepEntry& e : report.entries) {
    detail::require(e.alpha < std::exp(-1.0), "log-corrected law needs alpha < 1/e");
  }
  const auto window = asym_detail::fit_window(report);
  const double power = 2.0 / (2.0 - gamma);
  LogCorrectedFit out;
  out.ratio_min = std::numeric_limits<double>::infinity();
  std::vector<double> x, y;
  for (const SweepEntry& e : window) {
    const double s = std::abs(e.alpha * std::log(e.alpha));
    const double r = -e.e1 / std::pow(s, power);
    out.ratio_min = std::min(out.ratio_min, r);
    out.ratio_max = std::max(out.ratio_max, r);
    x.push_back(std::log(s));
    y.push_back(std::log(-e.e1));
  }
  const LineFit f = least_squares(x, y);
  out.exponent = f.slope;
  out.residual = f.residual;
  return out;
}

/// Fills the report's fit fields for the chosen law.
inline void attach_fit(SweepReport& report, Law law, double gamma = 0.0) {
  report.law = law;
  if (law == Law::Power) {
    const PowerFit f = fit_power_law(report);
    report.fit_exponent = f.exponent;
    report.fit_intercept = f.intercept;
    report.fit_residual = f.residual;
  } else {
    const LogCorrectedFit f = fit_log_corrected(report, gamma);
    report.fit_exponent = f.exponent;
    report.fit_intercept = std::log(f.ratio_min);
    report.fit_residual = f.residual;
  }
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline void write_sweep_csv(std::ostream& os, const SweepReport& report) {
  os << "alpha,e1,truncation,converged\n";
  for (const SweepEntry& e : report.entries) {
    os << format_real(e.alpha) << ',' << format_real(e.e1) << ',' << format_real(e.truncation) << ','
       << (e.converged ? 1 : 0) << '\n';
  }
}

// ---- variational upper bounds ----

struct VariationalBound {
  double rayleigh_quotient = 0.0;
  double bound_constant = 0.0;
  double bound = 0.0;  // -bound_constant * (alpha scale)
  double parameter = 0.0;  // K or beta actually used
};

/// E_1(2) = int_1^inf e^{-2x}/x dx.
inline double exp_trial_k_tilde(double gamma, double c_lower, double k) {
  return std::pow(k, gamma) * c_lower * boost::math::expint(1, 2.0) - k * k * 0.75;
}

inline double default_exp_k(double gamma, double c_lower) {
  double best = 0.0, best_value = 0.0;
  for (double k : quad::geomspace(1e-4, 10.0, 201)) {
    const double v = exp_trial_k_tilde(gamma, c_lower, k);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  detail::require(best > 0.0, "no K with positive K-tilde on the search grid");
  return best;
}

/// Rayleigh quotient of u = e^{-delta x}, delta = K alpha^{1/(2-gamma)}, for the weighted half-line form.
inline VariationalBound variational_bound_exp(double d, double gamma, double c_lower, double alpha, double k = 0.0) {
  detail::require(gamma > 1.0 && gamma < d && d <= 2.0, "exponential trial needs 1 < gamma < d <= 2");
  detail::require(c_lower > 0.0 && alpha > 0.0, "c_lower and alpha must be positive");
  if (k == 0.0) k = default_exp_k(gamma, c_lower);
  const double k_tilde = exp_trial_k_tilde(gamma, c_lower, k);
  detail::require(k_tilde > 0.0, "K-tilde must be positive for this K");
  const double delta = k * std::pow(alpha, 1.0 / (2.0 - gamma));
  detail::require(delta < 1.0, "delta = K alpha^{1/(2-gamma)} must be below 1");

  std::vector<double> breaks{0.0};
  for (double b = 1.0; b < 80.0 / delta; b *= 2.0) breaks.push_back(b);
  breaks.push_back(80.0 / delta);
  const quad::Tolerance tol{0.0, 1e-12};
  const double norm = quad::integrate_panels([&](double x) { return std::exp(-2.0 * delta * x) * std::pow(1.0 + x, d - 1.0); },
                                             breaks, tol).value;
  const double pot = quad::integrate_panels(
                         [&](double x) { return std::exp(-2.0 * delta * x) * std::pow(1.0 + x, d - 1.0 - gamma); }, breaks, tol)
                         .value;
  VariationalBound out;
  out.parameter = k;
  out.rayleigh_quotient = delta * delta - alpha * c_lower * pot / norm;
  out.bound_constant = std::pow(2.0, d) * k_tilde / gamma_fn(d);
  out.bound = -out.bound_constant * std::pow(alpha, 2.0 / (2.0 - gamma));
  return out;
}

inline double hat_trial_m(double d, double c_lower, double beta) {
  return c_lower / (8.0 * (2.0 - d)) * std::log(beta / 2.0) - std::pow(2.0, d) / d * std::pow(beta, d - 2.0);
}

inline double default_hat_beta(double d, double c_lower) {
  for (double beta = 4.0; beta < 1e300; beta *= 2.0) {
    if (hat_trial_m(d, c_lower, beta) > 0.0) return beta;
  }
  throw PreconditionError("no beta with positive M");
}

/// Hat trial w = 1 - x/mu on (0, mu), mu = beta / |alpha log alpha|^{1/(2-d)}, potential c(1+x)^{-d}.
inline VariationalBound variational_bound_hat(double d, double c_lower, double alpha, double beta = 0.0) {
  detail::require(d > 1.0 && d < 2.0, "hat trial needs 1 < gamma = d < 2");
  detail::require(c_lower > 0.0 && alpha > 0.0 && alpha < 1.0, "need c_lower > 0 and 0 < alpha < 1");
  if (beta == 0.0) beta = default_hat_beta(d, c_lower);
  detail::require(beta > 2.0, "beta must exceed 2");
  const double m = hat_trial_m(d, c_lower, beta);
  detail::require(m > 0.0, "M must be positive for this beta");
  const double log_scale = std::abs(alpha * std::log(alpha));
  const double nu = std::pow(log_scale, -1.0 / (2.0 - d));
  detail::require(nu >= std::exp(1.0), "need nu = |alpha log alpha|^{-1/(2-d)} >= e");
  const double mu = beta * nu;
  const double a = 1.0 + mu;

  const double kinetic = (std::pow(a, d) - 1.0) / (d * mu * mu);
  // int_1^A (A - s)^2 s^{d-1} ds / mu^2 and int_1^A (A - s)^2 / s ds / mu^2
  const double norm = (a * a * (std::pow(a, d) - 1.0) / d - 2.0 * a * (std::pow(a, d + 1.0) - 1.0) / (d + 1.0) +
                       (std::pow(a, d + 2.0) - 1.0) / (d + 2.0)) /
                      (mu * mu);
  const double pot = (a * a * std::log(a) - 2.0 * a * (a - 1.0) + 0.5 * (a * a - 1.0)) / (mu * mu);

  VariationalBound out;
  out.parameter = beta;
  out.rayleigh_quotient = (kinetic - alpha * c_lower * pot) / norm;
  out.bound_constant = d * m / std::pow(2.0 * beta, d);
  out.bound = -out.bound_constant * std::pow(log_scale, 2.0 / (2.0 - d));
  return out;
}

inline double hat_kinetic(double d, double mu) { return (std::pow(1.0 + mu, d) - 1.0) / (d * mu * mu); }

// ---- Lambert-W inversion of the log-corrected trace bound ----

struct LambertReplay {
  double d_tilde = 0.0;
  std::vector<double> bounds;  // upper bound on E(alpha) per entry
  bool holds = true;
};

/// From 1/alpha <= D E^{(gamma-2)/2} (1 + |log E|), with D fitted as the smallest constant
/// covering the supplied (alpha, E, trace) data, replays
///   E(alpha) <= [ (2 D~/(2-gamma)) alpha W((2-gamma)/(2 D~ alpha)) ]^{2/(2-gamma)},  D~ = 2D.
inline LambertReplay lambert_replay(double gamma, std::span<const double> alphas, std::span<const double> energies,
                                    std::span<const double> traces) {
  detail::require(alphas.size() == energies.size() && alphas.size() == traces.size() && !alphas.empty(),
                  "replay needs matching, non-empty data");
  detail::require(gamma > 1.0 && gamma < 2.0, "replay needs 1 < gamma < 2");
  double big_d = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    detail::require(energies[i] > 0.0 && energies[i] < std::exp(-1.0), "replay needs 0 < E < 1/e");
    const double scale = std::pow(energies[i], (gamma - 2.0) / 2.0) * (1.0 + std::abs(std::log(energies[i])));
    big_d = std::max(big_d, traces[i] / scale);
  }
  LambertReplay out;
  out.d_tilde = 2.0 * big_d;
  const double g = 2.0 - gamma;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double z = g / (2.0 * out.d_tilde * alphas[i]);
    const double bound = std::pow(2.0 * out.d_tilde / g * alphas[i] * lambert_w(z), 2.0 / g);
    out.bounds.push_back(bound);
    out.holds = out.holds && energies[i] <= bound;
  }
  return out;
}

/// Trace of Q_E at each swept E = -e1, for the lower-bound chain 1/alpha <= tr Q_E.
inline std::vector<double> traces_at_ground_states(const SweepReport& report, double d, const PotentialSpec& v) {
  std::vector<double> out;
  for (const SweepEntry& e : report.entries) {
    out.push_back(e.converged && e.e1 < 0.0 ? trace_qe({-e.e1, d, v, {}}).value : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace weaktree
