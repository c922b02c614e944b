#pragma once

// Graded one-dimensional meshes: geometric growth from a small first cell,
// capped at a fraction of the eigenfunction decay length, with optional
// forced nodes (weight discontinuities).

#include <algorithm>
#include <cmath>
#include <vector>

#include "weaktree/errors.hpp"

namespace weaktree {

struct MeshOptions {
  double first_cell = 0.01;     // further limited to truncation * 1e-5
  double ratio = 1.02;          // geometric growth of consecutive cells
  double decay_fraction = 0.01; // cell cap as a fraction of the decay length
  std::size_t min_nodes = 101;
};

/// Nodes 0 = x_0 < ... < x_N = truncation.
inline std::vector<double> graded_mesh(double truncation, double decay_length, const MeshOptions& opts = {},
                                       std::vector<double> forced = {}) {
  detail::require(truncation > 0.0 && std::isfinite(truncation), "mesh truncation must be positive and finite");
  detail::require(opts.ratio >= 1.0 && opts.first_cell > 0.0 && opts.decay_fraction > 0.0, "invalid mesh options");
  std::sort(forced.begin(), forced.end());
  std::erase_if(forced, [&](double f) { return !(f > 0.0 && f < truncation); });
  forced.push_back(truncation);

  const double cap = std::max(opts.decay_fraction * decay_length, 1e-300);
  double h = std::min({opts.first_cell, truncation * 1e-5, cap});
  std::vector<double> x{0.0};
  auto next_forced = forced.begin();
  while (x.back() < truncation) {
    const double here = x.back();
    double next = here + h;
    if (next >= *next_forced - 0.25 * h) {
      next = *next_forced;
      ++next_forced;
    }
    x.push_back(next);
    h = std::min(h * opts.ratio, cap);
  }
  // short meshes (tiny truncation) are refined uniformly until the node count is met
  while (x.size() < opts.min_nodes) {
    std::vector<double> fine;
    fine.reserve(2 * x.size());
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      fine.push_back(x[i]);
      fine.push_back(0.5 * (x[i] + x[i + 1]));
    }
    fine.push_back(x.back());
    x = std::move(fine);
  }
  return x;
}

/// Inserts every cell midpoint; nested, so eigenvalue errors drop by about 4.
inline std::vector<double> refine_mesh(const std::vector<double>& x) {
  std::vector<double> fine;
  fine.reserve(2 * x.size());
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    fine.push_back(x[i]);
    fine.push_back(0.5 * (x[i] + x[i + 1]));
  }
  if (!x.empty()) fine.push_back(x.back());
  return fine;
}

inline void validate_mesh(const std::vector<double>& x) {
  detail::require(x.size() >= 101, "mesh needs at least 100 cells");
  detail::require(x.front() == 0.0, "mesh must start at 0");
  for (std::size_t i = 1; i < x.size(); ++i) detail::require(x[i] > x[i - 1], "mesh must increase strictly");
}

}  // namespace weaktree
