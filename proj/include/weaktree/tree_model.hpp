#pragma once

// Regular metric trees of prescribed dimension: geometric branching schedules,
// branching function, dimension sandwich constants and reduced height.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "weaktree/errors.hpp"

namespace weaktree {

struct TreeSpec {
  double d = 1.5;
  int b = 2;
  std::vector<double> generation_radii;  // t_1 < t_2 < ... , all below truncation_height
  double truncation_height = 1.0;

  std::size_t generations() const { return generation_radii.size(); }
};

struct DimensionConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  double e_plus = 1.0;
  double e_minus = 1.0;
};

struct ReducedHeight {
  double truncated = 0.0;      // integral of 1/g over [0, truncation_height]
  bool idealized_infinite = true;
};

inline void validate(const TreeSpec& spec) {
  detail::require(spec.d > 1.0 && spec.d <= 2.0, "tree dimension d must lie in (1, 2]");
  detail::require(spec.b >= 2, "branching number must be at least 2");
  detail::require(spec.truncation_height > 0.0, "truncation height must be positive");
  for (std::size_t k = 0; k < spec.generation_radii.size(); ++k) {
    detail::require(spec.generation_radii[k] > 0.0, "generation radii must be positive");
    if (k > 0) detail::require(spec.generation_radii[k] > spec.generation_radii[k - 1], "generation radii must increase");
  }
  if (!spec.generation_radii.empty()) {
    detail::require(spec.generation_radii.back() < spec.truncation_height, "generation radius beyond truncation");
  }
}

/// Radii t_k = b^{k/(d-1)} - 1 strictly below the truncation height.
inline TreeSpec build_geometric_tree(double d, int b, double truncation_height) {
  detail::require(d > 1.0 && d <= 2.0, "tree dimension d must lie in (1, 2]");
  detail::require(b >= 2, "branching number must be at least 2");
  detail::require(truncation_height > 0.0, "truncation height must be positive");
  TreeSpec spec{d, b, {}, truncation_height};
  for (int k = 1;; ++k) {
    const double t = std::pow(static_cast<double>(b), k / (d - 1.0)) - 1.0;
    if (!(t < truncation_height)) break;
    spec.generation_radii.push_back(t);
  }
  return spec;
}

inline int generation_at(const TreeSpec& spec, double t) {
  return static_cast<int>(std::upper_bound(spec.generation_radii.begin(), spec.generation_radii.end(), t) -
                          spec.generation_radii.begin());
}

/// g(t) = b^k with k = #{t_j <= t}; right-continuous at the radii.
inline std::int64_t branching_function(const TreeSpec& spec, double t) {
  if (t < 0.0) throw DomainError("branching_function: t must be non-negative");
  std::int64_t g = 1;
  for (int k = generation_at(spec, t); k > 0; --k) g *= spec.b;
  return g;
}

/// Sandwich constants of the idealized geometric tree, where g = b^k while
/// (1+t)^{d-1} runs over [b^k, b^{k+1}).
inline DimensionConstants dimension_constants(const TreeSpec& spec) {
  validate(spec);
  const double c1 = 1.0 / static_cast<double>(spec.b);
  const double c2 = 1.0;
  return {c1, c2, c1 / c2, c2 / c1};
}

inline ReducedHeight reduced_height(const TreeSpec& spec) {
  double total = 0.0;
  double left = 0.0;
  double g = 1.0;
  for (double t : spec.generation_radii) {
    total += (t - left) / g;
    left = t;
    g *= spec.b;
  }
  total += (spec.truncation_height - left) / g;
  // sum_k (t_{k+1} - t_k) / b^k grows like b^{k(2-d)/(d-1)} for d < 2 and linearly in k for d = 2.
  return {total, true};
}

}  // namespace weaktree
