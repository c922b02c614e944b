#pragma once

// The transform diagonalizing H0 = -d^2/dx^2 + (d-1)(d-3)/(4(1+x)^2) with
// phi'(0) = (d-1)/2 phi(0):
//   (U phi)(p) = int phi(x) sqrt(p(1+x)) f_d(p, x) dx,
//   (U^{-1} psi)(x) = int psi(p) sqrt(p(1+x)) f_d(p, x) dp,
// both against Lebesgue measure, and H0 becomes multiplication by p^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <boost/math/interpolators/makima.hpp>

#include "weaktree/errors.hpp"
#include "weaktree/quadrature.hpp"
#include "weaktree/special_fn.hpp"

namespace weaktree {

/// Samples of a function on increasing nodes; zero outside [support_lo, support_hi].
struct SampledFunction {
  std::vector<double> nodes;
  std::vector<double> values;
  double support_lo = 0.0;
  double support_hi = 0.0;
};

/// Modified Akima interpolation of the samples, zero outside the support.
class Interpolant {
 public:
  explicit Interpolant(const SampledFunction& f) : lo_(f.support_lo), hi_(f.support_hi) {
    detail::require(f.nodes.size() == f.values.size() && f.nodes.size() >= 4, "interpolation needs at least 4 samples");
    for (std::size_t i = 1; i < f.nodes.size(); ++i) {
      detail::require(f.nodes[i] > f.nodes[i - 1], "sample nodes must increase strictly");
    }
    first_ = f.nodes.front();
    last_ = f.nodes.back();
    spline_ = std::make_shared<Spline>(std::vector<double>(f.nodes), std::vector<double>(f.values));
  }

  double operator()(double x) const {
    if (x < lo_ || x > hi_ || x < first_ || x > last_) return 0.0;
    return (*spline_)(x);
  }

 private:
  using Spline = boost::math::interpolators::makima<std::vector<double>>;
  std::shared_ptr<Spline> spline_;
  double lo_;
  double hi_;
  double first_ = 0.0;
  double last_ = 0.0;
};

struct TransformOptions {
  double absolute_tolerance = 1e-9;
  double relative_tolerance = 1e-12;
  std::size_t max_pieces = 20000;
};

struct TransformResult {
  SampledFunction function;
  std::vector<std::uint8_t> converged;  // per grid point

  bool all_converged() const {
    return std::all_of(converged.begin(), converged.end(), [](std::uint8_t c) { return c != 0; });
  }
};

namespace fb_detail {

/// Breakpoints splitting [a, b] into pieces no longer than `width`.
inline std::vector<double> capped_breaks(double a, double b, double width) {
  const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / width)));
  return quad::linspace(a, b, pieces + 1);
}

inline void check_grid(const std::vector<double>& grid, const char* what) {
  detail::require(!grid.empty(), std::string(what) + " grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    detail::require(grid[i] > 0.0, std::string(what) + " grid must be positive");
    if (i > 0) detail::require(grid[i] > grid[i - 1], std::string(what) + " grid must increase strictly");
  }
}

}  // namespace fb_detail

/// Flattened spectral density p / (J_{-d/2}(p)^2 + Y_{-d/2}(p)^2).
inline double spectral_density(double d, double p) {
  if (!(p > 0.0)) throw DomainError("spectral_density: p must be positive");
  const double m = FdKernel(p, d).modulus();
  return p / (m * m);
}

/// sqrt(p(1+x)) f_d(p, x): the transform kernel shared with the Birman-Schwinger factorization.
inline double fb_kernel(const FdKernel& f, double x) { return std::sqrt(f.p() * (1.0 + x)) * f(x); }

/// (U phi)(p) for phi supported in [a, b]; panels no longer than half a wavelength pi/p.
template <class F>
quad::Result fb_forward_at(F&& phi, double a, double b, double p, double d, const TransformOptions& opts = {}) {
  const FdKernel kernel(p, d);
  const auto breaks = fb_detail::capped_breaks(a, b, M_PI / p);
  return quad::integrate_panels([&](double x) { return phi(x) * fb_kernel(kernel, x); }, breaks,
                                {opts.absolute_tolerance, opts.relative_tolerance}, opts.max_pieces);
}

/// (U^{-1} psi)(x) for psi supported in [a, b] of the spectral variable.
template <class F>
quad::Result fb_inverse_at(F&& psi, double a, double b, double x, double d, const TransformOptions& opts = {}) {
  const auto breaks = fb_detail::capped_breaks(a, b, M_PI / (1.0 + x));
  return quad::integrate_panels([&](double p) { return psi(p) * fb_kernel(FdKernel(p, d), x); }, breaks,
                                {opts.absolute_tolerance, opts.relative_tolerance}, opts.max_pieces);
}

/// U phi on p_grid for a callable phi supported in [a, b] with 0 < a < b.
template <class F>
TransformResult fb_forward(F&& phi, double a, double b, const std::vector<double>& p_grid, double d,
                           const TransformOptions& opts = {}) {
  detail::require(a > 0.0 && b > a, "transform input needs compact support inside (0, inf)");
  fb_detail::check_grid(p_grid, "p");
  TransformResult out;
  out.function.nodes = p_grid;
  out.function.support_lo = p_grid.front();
  out.function.support_hi = p_grid.back();
  for (double p : p_grid) {
    const quad::Result r = fb_forward_at(phi, a, b, p, d, opts);
    out.function.values.push_back(r.value);
    out.converged.push_back(r.converged ? 1 : 0);
  }
  return out;
}

inline TransformResult fb_forward(const SampledFunction& phi, const std::vector<double>& p_grid, double d,
                                  const TransformOptions& opts = {}) {
  const Interpolant f(phi);
  return fb_forward(f, phi.support_lo, phi.support_hi, p_grid, d, opts);
}

template <class F>
TransformResult fb_inverse(F&& psi, double a, double b, const std::vector<double>& x_grid, double d,
                           const TransformOptions& opts = {}) {
  detail::require(a > 0.0 && b > a, "inverse transform input needs compact support inside (0, inf)");
  fb_detail::check_grid(x_grid, "x");
  TransformResult out;
  out.function.nodes = x_grid;
  out.function.support_lo = x_grid.front();
  out.function.support_hi = x_grid.back();
  for (double x : x_grid) {
    const quad::Result r = fb_inverse_at(psi, a, b, x, d, opts);
    out.function.values.push_back(r.value);
    out.converged.push_back(r.converged ? 1 : 0);
  }
  return out;
}

/// Sampled spectral input: the interpolant is a cubic between consecutive
/// samples, so each sample interval gets its own Gauss rule (8 points, checked
/// against 4) and the kernel constants are shared across all x.
inline TransformResult fb_inverse(const SampledFunction& psi, const std::vector<double>& x_grid, double d,
                                  const TransformOptions& opts = {}) {
  fb_detail::check_grid(x_grid, "x");
  const Interpolant f(psi);
  std::vector<double> lo_nodes;
  std::vector<double> lo_weights;
  std::vector<double> hi_nodes;
  std::vector<double> hi_weights;
  std::vector<double> breaks;
  for (double p : psi.nodes) {
    if (p >= psi.support_lo && p <= psi.support_hi) breaks.push_back(p);
  }
  detail::require(breaks.size() >= 2 && breaks.front() > 0.0, "inverse transform input needs support inside (0, inf)");
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    quad::gauss_legendre<4>().map(breaks[i], breaks[i + 1], lo_nodes, lo_weights);
    quad::gauss_legendre<8>().map(breaks[i], breaks[i + 1], hi_nodes, hi_weights);
  }
  const auto prepare = [&](const std::vector<double>& nodes, const std::vector<double>& weights) {
    std::vector<FdKernel> kernels;
    std::vector<double> scaled;
    kernels.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      kernels.emplace_back(nodes[i], d);
      scaled.push_back(weights[i] * f(nodes[i]));
    }
    return std::make_pair(std::move(kernels), std::move(scaled));
  };
  const auto coarse = prepare(lo_nodes, lo_weights);
  const auto fine = prepare(hi_nodes, hi_weights);
  const auto apply = [](const auto& rule, double x) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.first.size(); ++i) sum += rule.second[i] * fb_kernel(rule.first[i], x);
    return sum;
  };
  TransformResult out;
  out.function.nodes = x_grid;
  out.function.support_lo = x_grid.front();
  out.function.support_hi = x_grid.back();
  for (double x : x_grid) {
    const double value = apply(fine, x);
    const double check = apply(coarse, x);
    out.function.values.push_back(value);
    const bool ok = std::abs(value - check) <= std::max(opts.absolute_tolerance, 1e-8 * std::abs(value)) * 1e3;
    out.converged.push_back(ok ? 1 : 0);
  }
  return out;
}

/// Fixed composite 16-point Gauss-Legendre rule in the spectral variable.
struct SpectralRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Geometric panels on [lo, hi], `per_decade` panels per factor of ten.
  SpectralRule& geometric(double lo, double hi, double per_decade = 6.0) {
    const auto n = static_cast<std::size_t>(std::ceil(std::log10(hi / lo) * per_decade));
    const auto breaks = quad::geomspace(lo, hi, std::max<std::size_t>(n, 1) + 1);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) quad::gauss_legendre<16>().map(breaks[i], breaks[i + 1], nodes, weights);
    return *this;
  }

  /// Panels no wider than `width` on [lo, hi].
  SpectralRule& uniform(double lo, double hi, double width) {
    const auto breaks = fb_detail::capped_breaks(lo, hi, width);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) quad::gauss_legendre<16>().map(breaks[i], breaks[i + 1], nodes, weights);
    return *this;
  }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Default rule for transforms of functions supported in [0, x_max]: geometric
/// below p = 1 (the low-p mass decays only like a power of p), then panels of a
/// quarter wavelength 2 pi / (1 + x_max).
inline SpectralRule spectral_rule(double p_min, double p_max, double x_max) {
  detail::require(p_min > 0.0 && p_min < 1.0 && p_max > 1.0 && x_max > 0.0, "invalid spectral rule range");
  SpectralRule rule;
  rule.geometric(p_min, 1.0).uniform(1.0, p_max, 0.5 * M_PI / (1.0 + x_max));
  return rule;
}

/// Smallest decade edge 10^k >= p_start such that the energy of U phi in
/// [10^{k-1}, 10^k] is at most `fraction` of the energy below 10^k.
template <class F>
double choose_p_max(F&& phi, double a, double b, double d, double fraction = 1e-8, double p_start = 10.0,
                    double p_limit = 1e4) {
  const auto energy = [&](const SpectralRule& rule) {
    return rule.integrate([&](double p) {
      const double u = fb_forward_at(phi, a, b, p, d).value;
      return u * u;
    });
  };
  double total = energy(SpectralRule{}.geometric(1e-8, 1.0));
  double edge = 1.0;
  while (edge < p_limit) {
    const double next = edge * 10.0;
    const double chunk = energy(SpectralRule{}.uniform(edge, next, 0.5 * M_PI / (1.0 + b)));
    total += chunk;
    edge = next;
    if (edge >= p_start && chunk <= fraction * total) break;
  }
  return edge;
}

}  // namespace weaktree
