#pragma once

// Ground states on explicit truncated regular trees (continuous piecewise-linear
// functions, Kirchhoff conditions built into the space) and on the
// symmetry-reduced half-line form with weight g(t).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "weaktree/errors.hpp"
#include "weaktree/fem.hpp"
#include "weaktree/halfline_solver.hpp"
#include "weaktree/mesh.hpp"
#include "weaktree/potential.hpp"
#include "weaktree/tree_model.hpp"

namespace weaktree {

struct TreeSolveOptions {
  DiscretizationOptions discretization;
  SolveOptions solve;
  std::size_t max_dofs = 2'000'000;
};

struct TreeMesh {
  TreeSpec tree;
  std::vector<double> radial;       // 0 = r_0 < ... < r_N = truncation height, radii included
  std::vector<fem::Cell> cells;
  std::vector<double> dof_x;        // distance of each dof from the root
  std::vector<int> path;            // dofs along the first root-to-leaf path, one per radial node but the last
};

inline std::size_t tree_dof_count(const TreeSpec& tree, const std::vector<double>& radial) {
  std::size_t total = 0;
  std::size_t edges = 1;
  double left = 0.0;
  std::vector<double> ends = tree.generation_radii;
  ends.push_back(tree.truncation_height);
  for (std::size_t k = 0; k < ends.size(); ++k) {
    std::size_t nodes = 0;
    for (double r : radial) nodes += (r > left && r <= ends[k]) ? 1 : 0;
    if (k + 1 == ends.size()) --nodes;  // Dirichlet leaf ends
    total += edges * nodes;
    left = ends[k];
    edges *= static_cast<std::size_t>(tree.b);
  }
  return total + 1;
}

/// Per-edge meshes are the radial mesh restricted to each edge's interval;
/// dofs are numbered generation by generation so parents precede children.
inline TreeMesh build_tree_mesh(const TreeSpec& tree, const std::vector<double>& radial, std::size_t max_dofs) {
  validate(tree);
  validate_mesh(radial);
  detail::require(radial.back() == tree.truncation_height, "radial mesh must end at the truncation height");
  for (double t : tree.generation_radii) {
    detail::require(std::binary_search(radial.begin(), radial.end(), t), "radial mesh must contain every generation radius");
  }
  const std::size_t dofs = tree_dof_count(tree, radial);
  if (dofs > max_dofs) {
    throw ResourceError("tree discretization needs " + std::to_string(dofs) + " dofs, cap is " +
                        std::to_string(max_dofs));
  }

  TreeMesh mesh{tree, radial, {}, {}, {}};
  mesh.dof_x.reserve(dofs);
  mesh.dof_x.push_back(0.0);
  mesh.path.push_back(0);
  std::vector<int> starts{0};
  std::size_t j0 = 0;
  const std::size_t n = radial.size() - 1;
  for (std::size_t k = 0; k <= tree.generations(); ++k) {
    const double end = k < tree.generations() ? tree.generation_radii[k] : tree.truncation_height;
    std::size_t j1 = j0;
    while (radial[j1] < end) ++j1;
    std::vector<int> next;
    for (std::size_t e = 0; e < starts.size(); ++e) {
      int previous = starts[e];
      for (std::size_t j = j0 + 1; j <= j1; ++j) {
        int dof = -1;
        if (j < n) {
          dof = static_cast<int>(mesh.dof_x.size());
          mesh.dof_x.push_back(radial[j]);
          if (e == 0) mesh.path.push_back(dof);
        }
        mesh.cells.push_back({previous, dof, radial[j - 1], radial[j]});
        previous = dof;
      }
      if (j1 < n) {
        for (int c = 0; c < tree.b; ++c) next.push_back(previous);
      }
    }
    starts = std::move(next);
    j0 = j1;
  }
  return mesh;
}

namespace tree_detail {

inline double energy_scale_plus(const TreeSpec& tree) { return dimension_constants(tree).e_plus; }

/// Radial mesh for a tree: decay length from the E+-scaled estimate, which
/// decays slowest among the bracketing problems.
inline std::vector<double> radial_mesh(const TreeSpec& tree, double alpha, const PotentialSpec& v,
                                       const DiscretizationOptions& opts) {
  const TruncationChoice t = choose_truncation(tree.d, alpha * energy_scale_plus(tree), v, opts);
  const double decay = std::min(t.decay_length, tree.truncation_height / opts.truncation_factor);
  return graded_mesh(tree.truncation_height, decay, opts.mesh, tree.generation_radii);
}

}  // namespace tree_detail

/// Smallest eigenvalue of sum_e int_e (|f'|^2 - alpha V(|x|) |f|^2) on the truncated tree.
/// nodes/eigenfunction report the radial trace along the first root-to-leaf path;
/// diagnostics.nodes is the total dof count.
inline SpectralResult tree_ground_state(const TreeSpec& tree, double alpha, const PotentialSpec& v,
                                        const TreeSolveOptions& opts = {}) {
  validate(tree);
  detail::require(alpha >= 0.0, "coupling alpha must be non-negative");
  const fem::LineForm form{[](double a, double b) { return b - a; }, [](double) { return 1.0; },
                           [alpha, &v](double x) { return -alpha * v(x); }};
  const auto radial = tree_detail::radial_mesh(tree, alpha, v, opts.discretization);
  return halfline_detail::with_extrapolation(radial, opts.solve, [&](const std::vector<double>& nodes) {
    const TreeMesh mesh = build_tree_mesh(tree, nodes, opts.max_dofs);
    const fem::Pencil pencil = fem::assemble(mesh.cells, mesh.dof_x.size(),
                                             [&form](const fem::Cell&) -> const fem::LineForm& { return form; });
    SpectralResult full = halfline_detail::solve_pencil(pencil, mesh.dof_x, tree.truncation_height, opts.solve);
    SpectralResult r = full;
    r.nodes = nodes;
    r.eigenfunction.clear();
    for (int dof : mesh.path) r.eigenfunction.push_back(full.eigenfunction[static_cast<std::size_t>(dof)]);
    r.eigenfunction.push_back(0.0);
    return r;
  });
}

/// Half-line form with piecewise-constant weight g(t); same mesh and boundary policy as the tree.
inline SpectralResult reduced_ground_state(const TreeSpec& tree, double alpha, const PotentialSpec& v,
                                           const TreeSolveOptions& opts = {}) {
  validate(tree);
  detail::require(alpha >= 0.0, "coupling alpha must be non-negative");
  const auto g = [&tree](double x) { return static_cast<double>(branching_function(tree, x)); };
  const fem::LineForm form{[g](double a, double b) { return g(0.5 * (a + b)) * (b - a); }, g,
                           [alpha, &v, g](double x) { return -alpha * v(x) * g(x); }};
  const auto radial = tree_detail::radial_mesh(tree, alpha, v, opts.discretization);
  return halfline_detail::with_extrapolation(radial, opts.solve, [&](const std::vector<double>& nodes) {
    validate_mesh(nodes);
    return halfline_detail::solve_chain(halfline_detail::assemble_chain(nodes, form), nodes, opts.solve);
  });
}

/// Geometric tree truncated by the default rule for coupling alpha.
inline TreeSpec bracket_tree(double d, int b, double alpha, const PotentialSpec& v,
                             const DiscretizationOptions& opts = {}) {
  const double e_plus = dimension_constants(build_geometric_tree(d, b, 1.0)).e_plus;
  return build_geometric_tree(d, b, choose_truncation(d, alpha * e_plus, v, opts).truncation);
}

struct TreeBracket {
  double e_minus = 0.0;    // weighted half-line, scale E-
  double e_tree = 0.0;
  double e_reduced = 0.0;
  double e_plus = 0.0;     // weighted half-line, scale E+
  bool converged = true;

  bool ordered(double tolerance) const {
    return e_minus <= e_tree && std::abs(e_tree - e_reduced) <= tolerance * std::abs(e_reduced) && e_tree <= e_plus;
  }
};

inline TreeBracket tree_bracket(double d, int b, double alpha, const PotentialSpec& v,
                                const TreeSolveOptions& opts = {}) {
  const TreeSpec tree = bracket_tree(d, b, alpha, v, opts.discretization);
  const DimensionConstants c = dimension_constants(tree);
  TreeBracket out;
  const SpectralResult minus = ground_state_weighted(make_halfline_problem(d, alpha, v, c.e_minus, opts.discretization), opts.solve);
  const SpectralResult plus = ground_state_weighted(make_halfline_problem(d, alpha, v, c.e_plus, opts.discretization), opts.solve);
  const SpectralResult t = tree_ground_state(tree, alpha, v, opts);
  const SpectralResult r = reduced_ground_state(tree, alpha, v, opts);
  out.e_minus = minus.e1;
  out.e_plus = plus.e1;
  out.e_tree = t.e1;
  out.e_reduced = r.e1;
  out.converged = minus.converged && plus.converged && t.converged && r.converged;
  return out;
}

}  // namespace weaktree
