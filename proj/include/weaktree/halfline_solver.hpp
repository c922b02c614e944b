#pragma once

// Ground states of the weighted half-line forms
//   h[u] = int (|u'|^2 - alpha*scale*V |u|^2) (1+x)^{d-1} dx
// and of the unitarily equivalent operator
//   -phi'' + ((d-1)(d-3)/(4(1+x)^2) - alpha*scale*V) phi,  phi'(0) = (d-1)/2 phi(0),
// by piecewise-linear elements with Dirichlet truncation at x = T.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "weaktree/errors.hpp"
#include "weaktree/fem.hpp"
#include "weaktree/mesh.hpp"
#include "weaktree/potential.hpp"
#include "weaktree/quadrature.hpp"
#include "weaktree/tree_matrix.hpp"

namespace weaktree {

struct HalfLineProblem {
  double d = 1.5;
  double alpha = 0.0;
  double scale = 1.0;
  PotentialSpec potential = PotentialSpec::exact_power(1.0, 1.5);
  double truncation = 0.0;
  std::vector<double> mesh;

  double coupling() const { return alpha * scale; }
};

struct SpectralDiagnostics {
  std::size_t nodes = 0;
  double truncation = 0.0;
  double tail_mass = 0.0;               // eigenfunction mass fraction in [0.9 T, T]
  bool truncation_warning = false;
  double mesh_change = std::numeric_limits<double>::quiet_NaN();  // e1(mesh/2) - e1(mesh)
  bool extrapolated = false;
};

struct SpectralResult {
  double e1 = 0.0;
  std::vector<double> nodes;
  std::vector<double> eigenfunction;    // nodal values, zero at the Dirichlet end
  double residual = 0.0;
  bool converged = true;
  SpectralDiagnostics diagnostics;
};

struct DiscretizationOptions {
  MeshOptions mesh;
  double truncation_factor = 12.0;
  double fallback_truncation = 1e4;
  double truncation_cap = std::numeric_limits<double>::infinity();
};

struct SolveOptions {
  // Richardson step from the mesh and its midpoint refinement; off returns the
  // raw discrete eigenvalue of the given mesh
  bool extrapolate = true;
  EigenOptions eigen;
  double tail_threshold = 1e-6;
};

struct TruncationChoice {
  double truncation = 0.0;
  double decay_length = 0.0;
  double energy_estimate = 0.0;  // -min Rayleigh quotient of e^{-delta x}; 0 if none negative
  bool fallback = false;
};

/// Coefficient of 1/(1+x)^2 in the transformed operator.
constexpr double transformed_coefficient(double d) { return (d - 1.0) * (d - 3.0) / 4.0; }

namespace halfline_detail {

/// Breakpoints 0, 1, 2, 4, ... up to `end`, plus the potential's support end.
inline std::vector<double> doubling_breaks(double end, const PotentialSpec& v) {
  std::vector<double> breaks{0.0};
  for (double b = 1.0; b < end; b *= 2.0) breaks.push_back(b);
  breaks.push_back(end);
  const double s = v.support_end();
  if (std::isfinite(s) && s > 0.0 && s < end) breaks.push_back(s);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

}  // namespace halfline_detail

/// Rayleigh quotient of u = e^{-delta x} for the weighted form with coupling a = alpha*scale.
inline double exp_trial_quotient(double d, double coupling, const PotentialSpec& v, double delta) {
  const double end = 60.0 / delta;
  const auto breaks = halfline_detail::doubling_breaks(end, v);
  const auto norm = quad::integrate_panels(
      [&](double x) { return std::exp(-2.0 * delta * x) * std::pow(1.0 + x, d - 1.0); }, breaks, {0.0, 1e-11});
  // table potentials have a kink at every sample, so the floor is absolute
  const quad::Tolerance pot_tol{1e-10 * v.c_upper() * norm.value, 1e-10};
  const auto pot = quad::integrate_panels(
      [&](double x) { return v(x) * std::exp(-2.0 * delta * x) * std::pow(1.0 + x, d - 1.0); }, breaks, pot_tol);
  return delta * delta - coupling * pot.value / norm.value;
}

/// Truncation T = factor / sqrt(E_est) from the best exponential trial function.
inline TruncationChoice choose_truncation(double d, double coupling, const PotentialSpec& v,
                                          const DiscretizationOptions& opts = {}) {
  TruncationChoice out;
  if (coupling > 0.0) {
    const auto quotient = [&](double log_delta) { return exp_trial_quotient(d, coupling, v, std::exp(log_delta)); };
    const double lo = std::log(1e-12);
    const double hi = std::log(10.0);
    const int grid = 72;
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
      const double value = quotient(lo + (hi - lo) * i / grid);
      if (value < best_value) {
        best_value = value;
        best = i;
      }
    }
    const double step = (hi - lo) / grid;
    const double a = lo + step * std::max(best - 1, 0);
    const double b = lo + step * std::min(best + 1, grid);
    const auto refined = boost::math::tools::brent_find_minima(quotient, a, b, 30);
    best_value = std::min(best_value, refined.second);
    if (best_value < 0.0) out.energy_estimate = -best_value;
  }
  if (out.energy_estimate > 0.0) {
    out.decay_length = 1.0 / std::sqrt(out.energy_estimate);
    out.truncation = opts.truncation_factor * out.decay_length;
  } else {
    out.fallback = true;
    out.truncation = opts.fallback_truncation;
    out.decay_length = out.truncation / opts.truncation_factor;
  }
  if (out.truncation > opts.truncation_cap) out.truncation = opts.truncation_cap;
  return out;
}

/// Problem with truncation and graded mesh chosen by the default rules.
inline HalfLineProblem make_halfline_problem(double d, double alpha, const PotentialSpec& v, double scale = 1.0,
                                             const DiscretizationOptions& opts = {}) {
  detail::require(d > 1.0 && d <= 2.0, "dimension d must lie in (1, 2]");
  detail::require(alpha >= 0.0 && std::isfinite(alpha), "coupling alpha must be non-negative");
  detail::require(scale > 0.0, "scale must be positive");
  const TruncationChoice t = choose_truncation(d, alpha * scale, v, opts);
  HalfLineProblem p{d, alpha, scale, v, t.truncation, graded_mesh(t.truncation, t.decay_length, opts.mesh)};
  return p;
}

inline void validate(const HalfLineProblem& p) {
  detail::require(p.d > 1.0 && p.d <= 2.0, "dimension d must lie in (1, 2]");
  detail::require(p.alpha >= 0.0 && std::isfinite(p.alpha), "coupling alpha must be non-negative");
  detail::require(p.scale > 0.0, "scale must be positive");
  validate_mesh(p.mesh);
  detail::require(p.mesh.back() == p.truncation, "mesh must end at the truncation point");
}

namespace halfline_detail {

/// Lowest eigenpair of an assembled pencil; dof_x gives each dof's distance
/// from the root, used for the tail-mass diagnostic.
inline SpectralResult solve_pencil(const fem::Pencil& pencil, const std::vector<double>& dof_x, double truncation,
                                   const SolveOptions& opts) {
  SpectralResult r;
  const LowestEigenpair pair = lowest_negative_eigenpair(pencil.k, pencil.m, opts.eigen);
  r.e1 = pair.value;
  r.residual = pair.residual;
  r.converged = pair.converged;
  r.diagnostics.nodes = dof_x.size();
  r.diagnostics.truncation = truncation;
  if (pair.negative) {
    const std::vector<double> mx = pencil.m.apply(pair.vector);
    const double cut = 0.9 * truncation;
    double tail = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < pair.vector.size(); ++i) {
      const double c = pair.vector[i] * mx[i];
      total += c;
      if (dof_x[i] >= cut) tail += c;
    }
    r.diagnostics.tail_mass = total > 0.0 ? std::max(tail / total, 0.0) : 0.0;
    r.diagnostics.truncation_warning = r.diagnostics.tail_mass > opts.tail_threshold;
    r.eigenfunction = pair.vector;
  } else {
    r.eigenfunction.assign(dof_x.size(), 0.0);
  }
  return r;
}

/// Chain solve: node values with the Dirichlet zero appended.
inline SpectralResult solve_chain(const fem::Pencil& pencil, const std::vector<double>& nodes,
                                  const SolveOptions& opts) {
  SpectralResult r = solve_pencil(pencil, std::vector<double>(nodes.begin(), nodes.end() - 1), nodes.back(), opts);
  r.nodes = nodes;
  r.eigenfunction.push_back(0.0);
  r.diagnostics.nodes = nodes.size();
  return r;
}

inline fem::LineForm weighted_form(const HalfLineProblem& p) {
  const double d = p.d;
  const double a = p.coupling();
  const PotentialSpec& v = p.potential;
  return {[d](double x0, double x1) { return fem::power_weight_integral(d, x0, x1); },
          [d](double x) { return std::pow(1.0 + x, d - 1.0); },
          [d, a, &v](double x) { return -a * v(x) * std::pow(1.0 + x, d - 1.0); }};
}

inline fem::LineForm transformed_form(const HalfLineProblem& p, double shift = 0.0) {
  const double d = p.d;
  const double a = p.coupling();
  const double c = transformed_coefficient(d);
  const PotentialSpec& v = p.potential;
  return {[](double x0, double x1) { return x1 - x0; }, [](double) { return 1.0; },
          [c, a, shift, &v](double x) { return c / ((1.0 + x) * (1.0 + x)) - a * v(x) + shift; }};
}

inline fem::Pencil assemble_chain(const std::vector<double>& nodes, const fem::LineForm& form) {
  return fem::assemble(fem::chain_cells(nodes), nodes.size() - 1,
                       [&form](const fem::Cell&) -> const fem::LineForm& { return form; });
}

/// For d <= 2 every positive coupling binds, so a missing negative eigenvalue means it fell
/// below what the inertia counts (or the trial search) can resolve.
inline void flag_missing_state(const HalfLineProblem& p, SpectralResult& r) {
  if (p.coupling() > 0.0 && !(r.e1 < 0.0)) r.converged = false;
}

template <class Solve>
SpectralResult with_extrapolation(const std::vector<double>& mesh, const SolveOptions& opts, Solve solve) {
  SpectralResult coarse = solve(mesh);
  if (!opts.extrapolate) return coarse;
  SpectralResult fine = solve(refine_mesh(mesh));
  const double change = fine.e1 - coarse.e1;
  fine.diagnostics.mesh_change = change;
  fine.diagnostics.extrapolated = true;
  if (fine.e1 < 0.0) fine.e1 = std::min(fine.e1 + change / 3.0, 0.0);
  fine.converged = fine.converged && coarse.converged;
  return fine;
}

}  // namespace halfline_detail

/// Smallest eigenvalue of the weighted form (natural condition at 0, Dirichlet at T), clamped to 0.
inline SpectralResult ground_state_weighted(const HalfLineProblem& p, const SolveOptions& opts = {}) {
  validate(p);
  const fem::LineForm form = halfline_detail::weighted_form(p);
  SpectralResult r = halfline_detail::with_extrapolation(p.mesh, opts, [&](const std::vector<double>& nodes) {
    return halfline_detail::solve_chain(halfline_detail::assemble_chain(nodes, form), nodes, opts);
  });
  halfline_detail::flag_missing_state(p, r);
  return r;
}

/// Same spectrum through the Robin-condition operator on unweighted L^2.
inline SpectralResult ground_state_transformed(const HalfLineProblem& p, const SolveOptions& opts = {}) {
  validate(p);
  const fem::LineForm form = halfline_detail::transformed_form(p);
  const double robin = (p.d - 1.0) / 2.0;
  SpectralResult r = halfline_detail::with_extrapolation(p.mesh, opts, [&](const std::vector<double>& nodes) {
    fem::Pencil pencil = halfline_detail::assemble_chain(nodes, form);
    pencil.k.diag[0] += robin;
    return halfline_detail::solve_chain(pencil, nodes, opts);
  });
  halfline_detail::flag_missing_state(p, r);
  return r;
}

struct ResolventResult {
  std::vector<double> nodes;
  std::vector<double> solution;  // nodal values of (H0 - alpha*scale*V + E)^{-1} f
  double form = 0.0;             // <f, (H0 - alpha*scale*V + E)^{-1} f>
};

/// Galerkin solve of (H0 - alpha*scale*V + E) u = f for the transformed operator.
/// The caller's mesh must extend well past the support of f (the solution decays like e^{-sqrt(E) x}).
template <class F>
ResolventResult resolvent_transformed(const HalfLineProblem& p, double e_shift, F&& f) {
  validate(p);
  detail::require(e_shift > 0.0, "resolvent shift E must be positive");
  const fem::LineForm form = halfline_detail::transformed_form(p, e_shift);
  fem::Pencil pencil = halfline_detail::assemble_chain(p.mesh, form);
  pencil.k.diag[0] += (p.d - 1.0) / 2.0;
  const ShiftedFactor factor(pencil.k, pencil.m, 0.0);
  detail::require(factor.negative_count() == 0, "resolvent: operator is not positive at this shift");

  const std::size_t n = p.mesh.size() - 1;
  std::vector<double> load(n, 0.0);
  const auto& rule = quad::gauss_legendre<4>();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = p.mesh[i];
    const double h = p.mesh[i + 1] - a;
    for (unsigned q = 0; q < 4; ++q) {
      const double t = 0.5 * (rule.nodes[q] + 1.0);
      const double fx = f(a + h * t) * 0.5 * h * rule.weights[q];
      load[i] += fx * (1.0 - t);
      if (i + 1 < n) load[i + 1] += fx * t;
    }
  }
  ResolventResult out;
  out.nodes = p.mesh;
  out.solution = factor.solve(load);
  out.form = detail::dot(load, out.solution);
  out.solution.push_back(0.0);
  return out;
}

}  // namespace weaktree
