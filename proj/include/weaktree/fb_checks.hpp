#pragma once

// Self-checks of the Fourier-Bessel transform on fixed smooth inputs:
// isometry, diagonalization of H0, and forward/inverse round trip.

#include <algorithm>
#include <cmath>
#include <vector>

#include "weaktree/fourier_bessel.hpp"
#include "weaktree/quadrature.hpp"

namespace weaktree {

namespace fb_inputs {

/// exp(-(x-5)^2/0.5) restricted to [3, 7]; squared norm sqrt(pi/4) erf(4).
inline double gaussian_bump(double x) { return (x >= 3.0 && x <= 7.0) ? std::exp(-(x - 5.0) * (x - 5.0) / 0.5) : 0.0; }
inline double gaussian_bump_norm2() { return std::sqrt(M_PI / 4.0) * std::erf(4.0); }

/// exp(-1/((x-1)(10-x))) on (1, 10) and H0 applied to it in closed form.
inline double smooth_bump(double x) {
  if (x <= 1.0 || x >= 10.0) return 0.0;
  return std::exp(-1.0 / ((x - 1.0) * (10.0 - x)));
}

inline double h0_smooth_bump(double x, double d) {
  if (x <= 1.0 || x >= 10.0) return 0.0;
  const double u = (x - 1.0) * (10.0 - x);
  const double du = 11.0 - 2.0 * x;
  const double g1 = -du / (u * u);
  const double g2 = (2.0 * u * u + 2.0 * u * du * du) / (u * u * u * u);
  const double f = std::exp(-1.0 / u);
  return -f * (g1 * g1 - g2) + (d - 1.0) * (d - 3.0) / (4.0 * (1.0 + x) * (1.0 + x)) * f;
}

}  // namespace fb_inputs

struct FbCheckReport {
  double d = 0.0;
  double isometry_residual = 0.0;         // | ||U phi||^2 / ||phi||^2 - 1 |
  double diagonalization_residual = 0.0;  // max |U(H0 phi) - p^2 U phi| / max |p^2 U phi|
  double roundtrip_error = 0.0;           // relative L2 error of U^{-1} U phi
  bool converged = true;
};

inline double fb_isometry_residual(double d) {
  const SpectralRule rule = spectral_rule(1e-8, 50.0, 7.0);
  const double energy = rule.integrate([&](double p) {
    const double u = fb_forward_at(fb_inputs::gaussian_bump, 3.0, 7.0, p, d).value;
    return u * u;
  });
  return std::abs(energy / fb_inputs::gaussian_bump_norm2() - 1.0);
}

inline double fb_diagonalization_residual(double d) {
  const std::vector<double> grid = quad::geomspace(0.1, 10.0, 41);
  const auto h0phi = [d](double x) { return fb_inputs::h0_smooth_bump(x, d); };
  const TransformResult lhs = fb_forward(h0phi, 1.0, 10.0, grid, d);
  const TransformResult rhs = fb_forward(fb_inputs::smooth_bump, 1.0, 10.0, grid, d);
  double worst = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expected = grid[i] * grid[i] * rhs.function.values[i];
    worst = std::max(worst, std::abs(lhs.function.values[i] - expected));
    peak = std::max(peak, std::abs(expected));
  }
  return worst / peak;
}

inline double fb_roundtrip_error(double d, bool* converged = nullptr) {
  const double p_max = choose_p_max(fb_inputs::gaussian_bump, 3.0, 7.0, d);
  std::vector<double> p_grid = quad::geomspace(1e-8, 1.0, 321);
  p_grid.pop_back();
  for (double p = 1.0; p <= p_max + 1e-9; p += 0.02) p_grid.push_back(p);
  const TransformResult forward = fb_forward(fb_inputs::gaussian_bump, 3.0, 7.0, p_grid, d);

  SpectralRule xr;
  xr.uniform(1e-9, 3.0, 0.25).uniform(3.0, 7.0, 0.25).uniform(7.0, 12.0, 0.25);
  const TransformResult back = fb_inverse(forward.function, xr.nodes, d);
  if (converged) *converged = forward.all_converged() && back.all_converged();
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < xr.nodes.size(); ++i) {
    const double truth = fb_inputs::gaussian_bump(xr.nodes[i]);
    err += xr.weights[i] * std::pow(back.function.values[i] - truth, 2);
    ref += xr.weights[i] * truth * truth;
  }
  return std::sqrt(err / ref);
}

inline FbCheckReport fb_self_check(double d) {
  FbCheckReport r;
  r.d = d;
  r.isometry_residual = fb_isometry_residual(d);
  r.diagonalization_residual = fb_diagonalization_residual(d);
  r.roundtrip_error = fb_roundtrip_error(d, &r.converged);
  return r;
}

}  // namespace weaktree
