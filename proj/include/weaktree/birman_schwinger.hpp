#pragma once

// Birman-Schwinger operator Q_E = (H0+E)^{-1/2} V (H0+E)^{-1/2} in the
// factorized form L_E L_E^*, with kernel
//   l_E(p, x) = f_d(p, x) sqrt(p(1+x) V(x) / (p^2 + E)).

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "weaktree/errors.hpp"
#include "weaktree/fourier_bessel.hpp"
#include "weaktree/potential.hpp"
#include "weaktree/quadrature.hpp"
#include "weaktree/special_fn.hpp"

namespace weaktree {

struct BSQuadrature {
  double relative_tolerance = 1e-6;   // outer (spectral) integral
  double inner_tolerance = 1e-8;      // inner (spatial) integrals
  double asymptotic_argument = 1e3;   // p(1+x) beyond which Hankel asymptotics replace the kernel
  double p_max = 1e3;                 // spectral cut, analytic tail beyond
  double p_min_factor = 1e-12;        // lower spectral cut as a multiple of sqrt(E)
};

struct BSKernelSpec {
  double e_shift = 1.0;
  double d = 1.5;
  PotentialSpec potential = PotentialSpec::exact_power(1.0, 1.2);
  BSQuadrature quadrature;
};

inline void validate(const BSKernelSpec& spec) {
  detail::require(spec.e_shift > 0.0 && std::isfinite(spec.e_shift), "spectral shift E must be positive");
  detail::require(spec.d > 1.0 && spec.d <= 2.0, "dimension d must lie in (1, 2]");
  detail::require(spec.potential.gamma() > 1.0 && spec.potential.gamma() <= spec.d, "need 1 < gamma <= d");
  detail::require(spec.potential.gamma() != 2.0, "excluded case gamma = 2 (need gamma != 2)");
}

inline double kernel_l(const BSKernelSpec& spec, double p, double x) {
  const double v = spec.potential(x);
  if (v == 0.0) return 0.0;
  return fd_kernel({p, x, spec.d}) * std::sqrt(p * (1.0 + x) * v / (p * p + spec.e_shift));
}

namespace bs_detail {

/// Hankel asymptotics of z f_d^2 at z = p(1+x):
///   (1/pi) [ (P^2+Q^2) - (P^2-Q^2) cos(2 chi) + 2 P Q sin(2 chi) ],
/// with chi = z - nu pi/2 - pi/4 - phase and P, Q the first Hankel corrections.
inline double z_fd_squared_asymptotic(const FdKernel& f, double z) {
  const double mu = 4.0 * f.order() * f.order();
  const double big_p = 1.0 - (mu - 1.0) * (mu - 9.0) / (128.0 * z * z);
  const double big_q = (mu - 1.0) / (8.0 * z);
  const double phase = std::atan2(f.sin_phase(), f.cos_phase());
  const double chi2 = 2.0 * z - f.order() * M_PI - 0.5 * M_PI - 2.0 * phase;
  return ((big_p * big_p + big_q * big_q) - (big_p * big_p - big_q * big_q) * std::cos(chi2) +
          2.0 * big_p * big_q * std::sin(chi2)) / M_PI;
}

/// int_S^inf c s^{-gamma} z f_d^2 ds for the exact power law, s = 1 + x, z = p s >= ~1e3:
/// mean part plus the leading boundary terms of the oscillating part.
inline double power_tail(const FdKernel& f, double c, double gamma, double s) {
  const double p = f.p();
  const double mu = 4.0 * f.order() * f.order();
  const double phase = std::atan2(f.sin_phase(), f.cos_phase());
  const double theta = 2.0 * p * s - f.order() * M_PI - 0.5 * M_PI - 2.0 * phase;
  const double mean = std::pow(s, 1.0 - gamma) / (gamma - 1.0) +
                      (mu - 1.0) / (8.0 * p * p) * std::pow(s, -gamma - 1.0) / (gamma + 1.0);
  // int_s^inf t^{-g} cos(2pt + .) dt and int_s^inf t^{-g-1} sin(2pt + .) dt to second order
  const double cos_part = -std::pow(s, -gamma) * std::sin(theta) / (2.0 * p) +
                          gamma * std::pow(s, -gamma - 1.0) * std::cos(theta) / (4.0 * p * p);
  const double sin_part = std::pow(s, -gamma - 1.0) * std::cos(theta) / (2.0 * p);
  return c / M_PI * (mean - cos_part + (mu - 1.0) / (4.0 * p) * sin_part);
}

/// Same tail for a piecewise-linear table on [S, support end]: the mean part
/// with its 1/z^2 correction, and the cosine term integrated exactly per segment.
inline double table_tail(const FdKernel& f, const PotentialSpec& v, double cut) {
  const double p = f.p();
  const double w = 2.0 * p;
  const double mu = 4.0 * f.order() * f.order();
  const double phase = std::atan2(f.sin_phase(), f.cos_phase());
  const double shift = 2.0 * p - f.order() * M_PI - 0.5 * M_PI - 2.0 * phase;  // 2 chi = w x + shift
  const auto& xs = v.kinks();
  double mean = 0.0, osc = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = std::max(xs[i], cut), b = xs[i + 1];
    if (b <= a) continue;
    const double va = v(a), vb = v(b);
    const double slope = (vb - va) / (b - a);
    // int V (mu-1)/(8 p^2 s^2): linear V against s^{-2}
    const double sa = 1.0 + a, sb = 1.0 + b;
    const double c0 = va - slope * sa;  // V = c0 + slope * s
    const double inv2 = c0 * (1.0 / sa - 1.0 / sb) + slope * std::log(sb / sa);
    mean += 0.5 * (va + vb) * (b - a) + (mu - 1.0) / (8.0 * p * p) * inv2;
    const auto anti = [&](double x, double vx) {
      const double t = w * x + shift;
      return vx * std::sin(t) / w + slope * std::cos(t) / (w * w);
    };
    osc += anti(b, vb) - anti(a, va);
  }
  return (mean - osc) / M_PI;
}

/// int_0^inf V(x) p(1+x) f_d(p,x)^2 dx.
inline quad::Result spatial_integral(const BSKernelSpec& spec, double p) {
  const FdKernel f(p, spec.d);
  const PotentialSpec& v = spec.potential;
  const BSQuadrature& q = spec.quadrature;
  const double end = v.support_end();
  const double cut = std::min(std::max(0.0, q.asymptotic_argument / p - 1.0), end);
  const double turn = 1.0 / p - 1.0;  // p(1+x) = 1: small-argument vs oscillatory character

  std::vector<double> breaks{0.0};
  for (double b = 1.0; b < std::min(turn, cut); b *= 2.0) breaks.push_back(b);
  const double osc_start = std::max(0.0, std::min(turn, cut));
  const auto osc = fb_detail::capped_breaks(osc_start, cut, M_PI / p);
  breaks.insert(breaks.end(), osc.begin(), osc.end());
  for (double k : v.kinks()) {
    if (k > 0.0 && k < cut) breaks.push_back(k);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  quad::Result r{};
  if (cut > 0.0) {
    const quad::Tolerance tol{0.0, q.inner_tolerance};
    r = quad::integrate_panels(
        [&](double x) {
          const double s = 1.0 + x;
          const double k = f(x);
          return v(x) * p * s * k * k;
        },
        breaks, tol, 20000);
  }
  if (cut < end) {
    if (v.form() == PotentialSpec::Form::ExactPower) {
      r.value += power_tail(f, v.c_lower(), v.gamma(), 1.0 + cut);
    } else {
      r.value += table_tail(f, v, cut);
    }
  }
  return r;
}

inline double potential_mass(const PotentialSpec& v) {
  if (v.form() == PotentialSpec::Form::ExactPower) return v.c_lower() / (v.gamma() - 1.0);
  const std::vector<double> breaks{0.0, v.support_end()};
  return quad::integrate_panels(v, breaks, {0.0, 1e-12}).value;
}

}  // namespace bs_detail

struct TraceResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  bool slow_convergence = false;  // E < 1e-10
};

/// tr Q_E = int int l_E(p,x)^2 dx dp by iterated quadrature.
inline TraceResult trace_qe(const BSKernelSpec& spec) {
  validate(spec);
  const double e = spec.e_shift;
  const double k = std::sqrt(e);
  const BSQuadrature& q = spec.quadrature;
  const double p_lo = q.p_min_factor * k;
  const double p_hi = q.p_max;

  std::vector<double> breaks;
  for (double b = p_lo; b < p_hi; b *= 10.0) breaks.push_back(b);
  breaks.push_back(p_hi);
  for (double m : {0.1, 0.3, 1.0, 3.0, 10.0}) {
    if (m * k > p_lo && m * k < p_hi) breaks.push_back(m * k);
  }
  std::sort(breaks.begin(), breaks.end());

  bool inner_ok = true;
  const auto integrand = [&](double p) {
    const quad::Result inner = bs_detail::spatial_integral(spec, p);
    inner_ok = inner_ok && inner.converged;
    return inner.value / (p * p + e);
  };
  const quad::Result body = quad::integrate_panels(integrand, breaks, {0.0, q.relative_tolerance}, 4000);

  // beyond p_hi the spatial integral sits at its mean (1/pi) int V
  const double mean = bs_detail::potential_mass(spec.potential) / M_PI;
  const double upper = mean * (0.5 * M_PI - std::atan(p_hi / k)) / k;
  // below p_lo the spatial integral grows like a power p^a with a >= gamma - 1
  const double a = std::min(spec.potential.gamma(), spec.d) - 1.0;
  const double lower = bs_detail::spatial_integral(spec, p_lo).value * p_lo / ((a + 1.0) * e);

  TraceResult out;
  out.value = body.value + upper + lower;
  out.error = body.error;
  out.converged = body.converged && inner_ok;
  out.slow_convergence = e < 1e-10;
  return out;
}

/// Product-grid discretization of L_E: A(i, j) = sqrt(wp_i) l_E(p_i, x_j) sqrt(wx_j).
/// Singular values of A squared approximate the eigenvalues of Q_E.
struct NystromGrid {
  std::vector<double> p, p_weights;
  std::vector<double> x, x_weights;
  Eigen::MatrixXd a;
};

struct NystromOptions {
  double decay_lengths = 30.0;   // spatial extent in units of 1/sqrt(E)
  double p_panel = 0.5;          // spectral panel width above p = 1
  double p_max_per_rank = 0.1;   // spectral cut grows with the rank
  double p_max_floor = 20.0;
};

namespace bs_detail {

inline void gauss16(std::vector<double>& nodes, std::vector<double>& weights, double a, double b) {
  quad::gauss_legendre<16>().map(a, b, nodes, weights);
}

}  // namespace bs_detail

/// Spatial grid: `rank` Gauss nodes on exponentially graded panels of [0, X].
/// Spectral grid: geometric panels up to 1, then uniform panels up to P.
inline NystromGrid nystrom_grid(const BSKernelSpec& spec, int rank, const NystromOptions& opts = {}) {
  validate(spec);
  detail::require(rank >= 16, "Nystrom rank must be at least 16");
  const double k = std::sqrt(spec.e_shift);
  NystromGrid g;

  const double x_end = std::min(opts.decay_lengths / k, spec.potential.support_end());
  const int x_panels = (rank + 15) / 16;
  const double first = std::min(0.25, x_end / x_panels);
  const double beta = std::log1p(x_end / first);
  const auto graded = [&](int i) { return i == x_panels ? x_end : x_end * std::expm1(beta * i / x_panels) / std::expm1(beta); };
  for (int i = 0; i < x_panels; ++i) bs_detail::gauss16(g.x, g.x_weights, graded(i), graded(i + 1));

  const double p_max = std::max(opts.p_max_floor, opts.p_max_per_rank * rank);
  for (double a = std::min(1e-3 * k, 0.1); a < 1.0; a *= 3.0) bs_detail::gauss16(g.p, g.p_weights, a, std::min(3.0 * a, 1.0));
  const int p_panels = static_cast<int>(std::ceil((p_max - 1.0) / opts.p_panel));
  const double h = (p_max - 1.0) / p_panels;
  for (int i = 0; i < p_panels; ++i) bs_detail::gauss16(g.p, g.p_weights, 1.0 + i * h, 1.0 + (i + 1) * h);

  std::vector<double> root_v(g.x.size());
  for (std::size_t j = 0; j < g.x.size(); ++j) root_v[j] = std::sqrt(g.x_weights[j] * (1.0 + g.x[j]) * spec.potential(g.x[j]));
  g.a.resize(static_cast<Eigen::Index>(g.p.size()), static_cast<Eigen::Index>(g.x.size()));
  for (std::size_t i = 0; i < g.p.size(); ++i) {
    const double p = g.p[i];
    const FdKernel f(p, spec.d);
    const double row = std::sqrt(g.p_weights[i] * p / (p * p + spec.e_shift));
    for (std::size_t j = 0; j < g.x.size(); ++j) {
      g.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = root_v[j] == 0.0 ? 0.0 : row * root_v[j] * f(g.x[j]);
    }
  }
  return g;
}

/// Quadratic form <g, L_E^* L_E g> on the spatial grid, g given at the nodes.
inline double nystrom_form(const NystromGrid& grid, const std::vector<double>& g) {
  detail::require(g.size() == grid.x.size(), "test vector must match the spatial grid");
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t j = 0; j < g.size(); ++j) v[static_cast<Eigen::Index>(j)] = std::sqrt(grid.x_weights[j]) * g[j];
  return (grid.a * v).squaredNorm();
}

struct NystromSpectrum {
  double top = 0.0;
  double trace = 0.0;  // sum of the discrete eigenvalues
  int rank = 0;
};

/// Sum of the discrete eigenvalues, i.e. the trace of the Gram matrix.
inline double nystrom_trace(const BSKernelSpec& spec, int rank, const NystromOptions& opts = {}) {
  return nystrom_grid(spec, rank, opts).a.squaredNorm();
}

inline NystromSpectrum nystrom_spectrum(const BSKernelSpec& spec, int rank, const NystromOptions& opts = {}) {
  const NystromGrid g = nystrom_grid(spec, rank, opts);
  const Eigen::MatrixXd gram = g.a.transpose() * g.a;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().maxCoeff(), es.eigenvalues().sum(), rank};
}

struct TopEigenvalue {
  double value = 0.0;
  int rank = 0;
  double change = 0.0;  // relative change against the doubled rank
  bool converged = false;
};

/// Largest eigenvalue of Q_E. Converged when doubling the rank moves it by less than 1e-4 (relative).
inline TopEigenvalue top_eigenvalue_qe(const BSKernelSpec& spec, int rank = 200, const NystromOptions& opts = {}) {
  detail::require(rank >= 200, "Nystrom rank must be at least 200");
  const double coarse = nystrom_spectrum(spec, rank, opts).top;
  const double fine = nystrom_spectrum(spec, 2 * rank, opts).top;
  TopEigenvalue out;
  out.value = fine;
  out.rank = 2 * rank;
  out.change = std::abs(fine - coarse) / std::abs(fine);
  out.converged = out.change < 1e-4;
  return out;
}

}  // namespace weaktree
