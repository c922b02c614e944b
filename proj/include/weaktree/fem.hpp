#pragma once

// Piecewise-linear finite elements for quadratic forms
//   sum_e int_e ( w |u'|^2 + q |u|^2 ) dx   against   int w |u|^2 dx
// on trees of intervals. Degrees of freedom are numbered root first with
// parent[i] < i so the assembled matrices are TreeMatrix instances.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "weaktree/quadrature.hpp"
#include "weaktree/tree_matrix.hpp"

namespace weaktree::fem {

/// One cell joining dof `near` (closer to the root) to dof `far`; far == -1 marks
/// a Dirichlet end.
struct Cell {
  int near;
  int far;
  double x0;
  double x1;
};

struct Local {
  double k00 = 0, k01 = 0, k11 = 0;
  double m00 = 0, m01 = 0, m11 = 0;
};

/// Form data: weight_integral(a, b) = int_a^b w, weight(x) = w(x) for the mass
/// and q(x) = potential-type term already multiplied by the weight.
struct LineForm {
  std::function<double(double, double)> weight_integral;
  std::function<double(double)> weight;
  std::function<double(double)> q;
};

inline Local integrate_cell(const LineForm& form, double a, double b) {
  const auto& rule = quad::gauss_legendre<4>();
  const double h = b - a;
  Local loc;
  const double stiff = form.weight_integral(a, b) / (h * h);
  loc.k00 = stiff;
  loc.k11 = stiff;
  loc.k01 = -stiff;
  for (unsigned i = 0; i < 4; ++i) {
    const double t = 0.5 * (rule.nodes[i] + 1.0);
    const double x = a + h * t;
    const double wq = 0.5 * h * rule.weights[i];
    const double w = form.weight(x) * wq;
    const double q = form.q(x) * wq;
    const double p0 = 1.0 - t;
    const double p1 = t;
    loc.m00 += w * p0 * p0;
    loc.m01 += w * p0 * p1;
    loc.m11 += w * p1 * p1;
    loc.k00 += q * p0 * p0;
    loc.k01 += q * p0 * p1;
    loc.k11 += q * p1 * p1;
  }
  return loc;
}

struct Pencil {
  TreeMatrix k;
  TreeMatrix m;
};

/// Assembles the stiffness and mass pencil; each non-root dof must appear as
/// `far` in exactly one cell, whose `near` dof becomes its parent.
inline Pencil assemble(const std::vector<Cell>& cells, std::size_t dofs,
                       const std::function<const LineForm&(const Cell&)>& form_of) {
  std::vector<int> parent(dofs, -2);
  if (dofs > 0) parent[0] = -1;
  for (const Cell& c : cells) {
    if (c.far >= 0) parent[static_cast<std::size_t>(c.far)] = c.near;
  }
  for (std::size_t i = 1; i < dofs; ++i) {
    detail::require(parent[i] >= 0 && parent[i] < static_cast<int>(i), "cell list does not form a root-first tree");
  }
  Pencil p{TreeMatrix(parent), TreeMatrix(parent)};
  for (const Cell& c : cells) {
    const Local loc = integrate_cell(form_of(c), c.x0, c.x1);
    const auto a = static_cast<std::size_t>(c.near);
    p.k.diag[a] += loc.k00;
    p.m.diag[a] += loc.m00;
    if (c.far >= 0) {
      const auto b = static_cast<std::size_t>(c.far);
      p.k.diag[b] += loc.k11;
      p.m.diag[b] += loc.m11;
      p.k.off[b] += loc.k01;
      p.m.off[b] += loc.m01;
    }
  }
  return p;
}

/// Cells of a single interval mesh with Dirichlet at the last node.
inline std::vector<Cell> chain_cells(const std::vector<double>& nodes) {
  std::vector<Cell> cells;
  const int last = static_cast<int>(nodes.size()) - 1;
  for (int i = 0; i < last; ++i) {
    cells.push_back({i, i + 1 == last ? -1 : i + 1, nodes[static_cast<std::size_t>(i)],
                     nodes[static_cast<std::size_t>(i) + 1]});
  }
  return cells;
}

/// int_a^b (1+x)^{d-1} dx without cancellation for short cells.
inline double power_weight_integral(double d, double a, double b) {
  const double base = 1.0 + a;
  return std::pow(base, d) * std::expm1(d * std::log1p((b - a) / base)) / d;
}

}  // namespace weaktree::fem
