#pragma once

// Adaptive Gauss-Kronrod integration with absolute and relative tolerances,
// and fixed Gauss-Legendre rules for element and panel quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace weaktree::quad {

struct Tolerance {
  double absolute = 1e-12;
  double relative = 1e-10;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;

  Result& operator+=(const Result& other) {
    value += other.value;
    error += other.error;
    converged = converged && other.converged;
    return *this;
  }
};

/// N-point Gauss-Legendre nodes and weights on [-1, 1], expanded from Boost's
/// half-range tables.
template <unsigned N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() {
    using Rule = boost::math::quadrature::gauss<double, N>;
    const auto& abscissa = Rule::abscissa();
    const auto& weight = Rule::weights();
    std::size_t k = 0;
    // abscissa[0] is 0 for odd N
    const std::size_t first = (N % 2 == 1) ? 1 : 0;
    for (std::size_t i = abscissa.size(); i-- > first;) {
      nodes[k] = -abscissa[i];
      weights[k] = weight[i];
      ++k;
    }
    if (N % 2 == 1) {
      nodes[k] = 0.0;
      weights[k] = weight[0];
      ++k;
    }
    for (std::size_t i = first; i < abscissa.size(); ++i) {
      nodes[k] = abscissa[i];
      weights[k] = weight[i];
      ++k;
    }
  }

  /// Rule mapped to [a, b]: node positions and scaled weights appended to the outputs.
  void map(double a, double b, std::vector<double>& x, std::vector<double>& w) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (unsigned i = 0; i < N; ++i) {
      x.push_back(mid + half * nodes[i]);
      w.push_back(half * weights[i]);
    }
  }
};

template <unsigned N>
const GaussLegendre<N>& gauss_legendre() {
  static const GaussLegendre<N> rule;
  return rule;
}

namespace detail {

struct Piece {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Piece& other) const { return error < other.error; }
};

template <class F>
Piece kronrod(F& f, double a, double b) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;
  double error = 0.0;
  const double value = Rule::integrate(f, a, b, 0, 0.0, &error);
  return {a, b, value, error};
}

}  // namespace detail

/// Globally adaptive G10/K21 over the panels [b_0, b_1], [b_1, b_2], ...:
/// the piece with the largest error estimate is bisected until the summed
/// error meets max(absolute, relative * |value|). Deterministic.
template <class F>
Result integrate_panels(F&& f, std::span<const double> breaks, Tolerance tol = {}, std::size_t max_pieces = 4000) {
  Result out;
  if (breaks.size() < 2) return out;
  std::priority_queue<detail::Piece> heap;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i] == breaks[i + 1]) continue;
    const detail::Piece p = detail::kronrod(f, breaks[i], breaks[i + 1]);
    value += p.value;
    error += p.error;
    heap.push(p);
  }
  while (!heap.empty() && error > std::max(tol.absolute, tol.relative * std::abs(value))) {
    if (heap.size() >= max_pieces || !std::isfinite(value)) {
      out.converged = false;
      break;
    }
    const detail::Piece worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      out.converged = false;
      break;
    }
    heap.pop();
    const detail::Piece left = detail::kronrod(f, worst.a, mid);
    const detail::Piece right = detail::kronrod(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // re-sum the final pieces to shed drift from the running updates
  double total = 0.0;
  double total_error = 0.0;
  std::vector<detail::Piece> pieces;
  pieces.reserve(heap.size());
  while (!heap.empty()) {
    pieces.push_back(heap.top());
    heap.pop();
  }
  std::sort(pieces.begin(), pieces.end(), [](const detail::Piece& x, const detail::Piece& y) { return x.a < y.a; });
  for (const detail::Piece& p : pieces) {
    total += p.value;
    total_error += p.error;
  }
  out.value = total;
  out.error = total_error;
  out.converged = out.converged && std::isfinite(total);
  return out;
}

template <class F>
Result integrate(F&& f, double a, double b, Tolerance tol = {}, std::size_t max_pieces = 4000) {
  if (a == b) return {};
  const double breaks[2] = {a, b};
  return integrate_panels(f, std::span<const double>(breaks, 2), tol, max_pieces);
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (n == 1) ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

inline std::vector<double> geomspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  const double ratio = std::log(b / a);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (n == 1) ? a : a * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  if (n > 1) out.back() = b;
  return out;
}

}  // namespace weaktree::quad
