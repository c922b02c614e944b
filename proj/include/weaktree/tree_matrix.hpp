#pragma once

// Symmetric matrices whose sparsity graph is a rooted tree (a chain being the
// simplest case). Node 0 is the root and parent[i] < i, so eliminating from the
// last index down to 0 produces no fill. Inertia follows from the pivot signs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "weaktree/errors.hpp"

namespace weaktree {

struct TreeMatrix {
  std::vector<int> parent;    // parent[0] == -1
  std::vector<double> diag;
  std::vector<double> off;    // off[i] = A(i, parent[i]); off[0] unused

  explicit TreeMatrix(std::vector<int> parents = {}) : parent(std::move(parents)) {
    diag.assign(parent.size(), 0.0);
    off.assign(parent.size(), 0.0);
  }

  std::size_t size() const { return parent.size(); }

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> y(size());
    for (std::size_t i = 0; i < size(); ++i) y[i] = diag[i] * x[i];
    for (std::size_t i = 1; i < size(); ++i) {
      const auto p = static_cast<std::size_t>(parent[i]);
      y[i] += off[i] * x[p];
      y[p] += off[i] * x[i];
    }
    return y;
  }

  /// |A| |x|, used to scale backward errors.
  std::vector<double> apply_abs(const std::vector<double>& x) const {
    std::vector<double> y(size());
    for (std::size_t i = 0; i < size(); ++i) y[i] = std::abs(diag[i] * x[i]);
    for (std::size_t i = 1; i < size(); ++i) {
      const auto p = static_cast<std::size_t>(parent[i]);
      y[i] += std::abs(off[i] * x[p]);
      y[p] += std::abs(off[i] * x[i]);
    }
    return y;
  }
};

inline std::vector<int> chain_parents(std::size_t n) {
  std::vector<int> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i) - 1;
  return parent;
}

/// LDL^T factorization of K - sigma*M in elimination order n-1, ..., 0.
class ShiftedFactor {
 public:
  ShiftedFactor(const TreeMatrix& k, const TreeMatrix& m, double sigma) : k_(k) {
    const std::size_t n = k.size();
    pivot_.resize(n);
    link_.resize(n);
    for (std::size_t i = 0; i < n; ++i) pivot_[i] = k.diag[i] - sigma * m.diag[i];
    for (std::size_t i = 1; i < n; ++i) link_[i] = k.off[i] - sigma * m.off[i];
    // an exactly zero pivot is perturbed on the scale of its row, as in classical inverse iteration
    const auto tiny = [&](std::size_t i) {
      return std::max(std::numeric_limits<double>::epsilon() * std::abs(k.diag[i]), std::numeric_limits<double>::min() * 1e10);
    };
    for (std::size_t i = n; i-- > 1;) {
      if (pivot_[i] == 0.0) pivot_[i] = tiny(i);
      if (pivot_[i] < 0.0) ++negative_;
      pivot_[static_cast<std::size_t>(k.parent[i])] -= link_[i] * link_[i] / pivot_[i];
    }
    if (n > 0) {
      if (pivot_[0] == 0.0) pivot_[0] = tiny(0);
      if (pivot_[0] < 0.0) ++negative_;
    }
  }

  /// Number of eigenvalues of the pencil below sigma.
  std::size_t negative_count() const { return negative_; }

  std::vector<double> solve(std::vector<double> b) const {
    const std::size_t n = pivot_.size();
    for (std::size_t i = n; i-- > 1;) {
      b[static_cast<std::size_t>(k_.parent[i])] -= link_[i] / pivot_[i] * b[i];
    }
    std::vector<double> x(n);
    if (n > 0) x[0] = b[0] / pivot_[0];
    for (std::size_t i = 1; i < n; ++i) {
      x[i] = (b[i] - link_[i] * x[static_cast<std::size_t>(k_.parent[i])]) / pivot_[i];
    }
    return x;
  }

 private:
  const TreeMatrix& k_;
  std::vector<double> pivot_;
  std::vector<double> link_;
  std::size_t negative_ = 0;
};

inline std::size_t count_below(const TreeMatrix& k, const TreeMatrix& m, double sigma) {
  return ShiftedFactor(k, m, sigma).negative_count();
}

struct LowestEigenpair {
  double value = 0.0;               // clamped to 0 when the pencil has no negative eigenvalue
  std::vector<double> vector;       // M-normalized; empty when clamped
  double residual = 0.0;            // componentwise backward error of the eigenpair
  bool converged = true;
  bool negative = false;
};

struct EigenOptions {
  double tolerance = 1e-10;
  int max_bisection = 300;
  int max_inverse = 30;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// Lowest eigenpair of K x = lambda M x (M positive definite) when lambda < 0.
/// The eigenvalue is bracketed by inertia counts, then polished by inverse
/// iteration shifted just below the bracket, starting from the all-ones vector.
inline LowestEigenpair lowest_negative_eigenpair(const TreeMatrix& k, const TreeMatrix& m, EigenOptions opts = {},
                                                 double guess = -1.0) {
  LowestEigenpair out;
  if (k.size() == 0 || count_below(k, m, 0.0) == 0) return out;
  out.negative = true;

  double lo = guess < 0.0 ? guess : -1.0;
  int steps = 0;
  while (count_below(k, m, lo) > 0) {
    lo *= 4.0;
    if (++steps > 600 || !std::isfinite(lo)) throw ConvergenceError("eigen bracket: no lower bound found");
  }
  double hi = lo / 4.0;
  while (count_below(k, m, hi) == 0) {
    lo = hi;
    hi /= 4.0;
    if (++steps > 1200) throw ConvergenceError("eigen bracket: no upper bound found");
  }
  // now count(lo) == 0 < count(hi) with lo < hi < 0
  bool bracketed = false;
  for (int it = 0; it < opts.max_bisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || (hi - lo) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(lo)) {
      bracketed = true;
      break;
    }
    (count_below(k, m, mid) == 0 ? lo : hi) = mid;
  }

  // a relative gap of 1e-9 keeps the factorization well conditioned while the
  // iteration still contracts by |lambda_1 - shift| / |lambda_2 - shift| per step
  const double shift = lo - 1e-9 * std::abs(lo);
  const ShiftedFactor factor(k, m, shift);
  std::vector<double> x(k.size(), 1.0);
  double lambda = lo;
  for (int it = 0; it < opts.max_inverse; ++it) {
    std::vector<double> y = factor.solve(m.apply(x));
    const double peak = std::abs(*std::max_element(y.begin(), y.end(), [](double a, double b) {
      return std::abs(a) < std::abs(b);
    }));
    for (double& v : y) v /= peak;
    const double norm = std::sqrt(detail::dot(y, m.apply(y)));
    for (double& v : y) v /= norm;
    x = std::move(y);
    const double next = detail::dot(x, k.apply(x));
    const bool settled = it >= 2 && std::abs(next - lambda) <= 1e-15 * std::abs(next);
    lambda = next;
    if (settled) break;
  }
  if (detail::dot(x, std::vector<double>(x.size(), 1.0)) < 0.0) {
    for (double& v : x) v = -v;
  }

  const std::vector<double> kx = k.apply(x);
  const std::vector<double> mx = m.apply(x);
  const std::vector<double> kabs = k.apply_abs(x);
  const std::vector<double> mabs = m.apply_abs(x);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num = std::max(num, std::abs(kx[i] - lambda * mx[i]));
    den = std::max(den, kabs[i] + std::abs(lambda) * mabs[i]);
  }
  out.residual = den > 0.0 ? num / den : 0.0;
  out.value = std::min(lambda, 0.0);
  out.vector = std::move(x);
  out.converged = bracketed && out.residual <= opts.tolerance && lambda >= lo - 1e-8 * std::abs(lo) &&
                  lambda <= hi + 1e-8 * std::abs(hi);
  return out;
}

}  // namespace weaktree
