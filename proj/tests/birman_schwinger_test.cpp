#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracle/bessel_oracle.hpp"
#include "oracle/trace_oracle.hpp"
#include "weaktree/birman_schwinger.hpp"
#include "weaktree/halfline_solver.hpp"

using namespace weaktree;

namespace {

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

BSKernelSpec power_spec(double e, double d, double gamma) {
  return {e, d, PotentialSpec::exact_power(1.0, gamma), {}};
}

PotentialSpec compact_table() {
  std::vector<double> xs, vs;
  for (int i = 0; i <= 400; ++i) {
    xs.push_back(10.0 * i / 400.0);
    vs.push_back(std::pow(1.0 + xs.back(), -1.5));
  }
  return PotentialSpec::table(xs, vs, 1.5, 1.0, 1.0);
}

}  // namespace

TEST(BirmanSchwinger, KernelSpotValue) {
  // p = x = 1, E = 1, d = 1.5, V = (1+x)^{-1.2}
  const double nu = 0.25;
  const double jm = oracle::j(-0.75, 1.0), ym = oracle::y(-0.75, 1.0);
  const double f = (jm * oracle::y(nu, 2.0) - ym * oracle::j(nu, 2.0)) / std::hypot(jm, ym);
  const double expected = f * std::sqrt(2.0 * std::pow(2.0, -1.2) / 2.0);
  EXPECT_NEAR(kernel_l(power_spec(1.0, 1.5, 1.2), 1.0, 1.0), expected, 1e-13);
}

TEST(BirmanSchwinger, TraceMatchesGreensDiagonal) {
  for (auto [d, gamma] : {std::pair{1.6, 1.2}, std::pair{1.5, 1.5}, std::pair{2.0, 1.5}}) {
    for (double e : {1e-4, 1e-2, 1e-1}) {
      const TraceResult tr = trace_qe(power_spec(e, d, gamma));
      EXPECT_TRUE(tr.converged);
      EXPECT_FALSE(tr.slow_convergence);
      EXPECT_LT(relative(tr.value, oracle::TraceOracle{d, e, 1.0, gamma}.trace()), 1e-8) << d << " " << gamma << " " << e;
    }
  }
}

TEST(BirmanSchwinger, TraceFrozenValues) {
  EXPECT_NEAR(trace_qe(power_spec(1e-3, 1.6, 1.2)).value, 74.97510363, 1e-6);
  EXPECT_NEAR(trace_qe(power_spec(1e-1, 2.0, 1.5)).value, 3.243576225, 1e-8);
}

TEST(BirmanSchwinger, SlowConvergenceFlag) {
  BSKernelSpec spec = power_spec(1e-11, 1.5, 1.5);
  EXPECT_TRUE(trace_qe(spec).slow_convergence);
}

TEST(BirmanSchwinger, TopEigenvalueBoundedByTrace) {
  for (double e : {0.01, 0.1}) {
    const BSKernelSpec spec = power_spec(e, 1.5, 1.2);
    const TopEigenvalue mu = top_eigenvalue_qe(spec);
    EXPECT_GT(mu.value, 0.0);
    EXPECT_LE(mu.value, trace_qe(spec).value);
    EXPECT_TRUE(mu.converged);
  }
}

TEST(BirmanSchwinger, TopEigenvalueDecreasesInE) {
  double previous = INFINITY;
  for (double e : {0.01, 0.03, 0.1, 0.3}) {
    const double mu = nystrom_spectrum(power_spec(e, 1.5, 1.2), 200).top;
    EXPECT_LT(mu, previous) << e;
    previous = mu;
  }
}

TEST(BirmanSchwinger, CorrespondenceWithGroundState) {
  const PotentialSpec v = PotentialSpec::exact_power(1.0, 1.2);
  for (double alpha : {0.2, 0.5, 1.0}) {
    const double e1 = ground_state_weighted(make_halfline_problem(1.5, alpha, v)).e1;
    ASSERT_LT(e1, 0.0);
    const TopEigenvalue mu = top_eigenvalue_qe({-e1, 1.5, v, {}});
    EXPECT_LT(std::abs(mu.value * alpha - 1.0), 1e-2) << alpha;
    EXPECT_LT(std::abs(mu.value * alpha - 1.0), 5e-4) << alpha;
  }
}

TEST(BirmanSchwinger, FactorizationMatchesResolvent) {
  const double e = 0.1, d = 1.5;
  const BSKernelSpec spec = power_spec(e, d, 1.2);
  const NystromGrid grid = nystrom_grid(spec, 400);

  HalfLineProblem p;
  p.d = d;
  p.alpha = 0.0;
  p.truncation = 60.0 + 40.0 / std::sqrt(e);
  MeshOptions fine;
  fine.decay_fraction = 0.002;
  p.mesh = graded_mesh(p.truncation, 1.0, fine);

  const std::vector<double (*)(double)> vectors{
      [](double x) { return std::exp(-x); },
      [](double x) { return x * std::exp(-0.5 * x); },
      [](double x) { return std::cos(x) * std::exp(-0.3 * x); },
  };
  for (auto g : vectors) {
    std::vector<double> at_nodes;
    for (double x : grid.x) at_nodes.push_back(g(x));
    const double via_kernel = nystrom_form(grid, at_nodes);
    const auto root_v_g = [&](double x) { return std::sqrt(spec.potential(x)) * g(x); };
    const double via_resolvent = resolvent_transformed(p, e, root_v_g).form;
    EXPECT_LT(relative(via_kernel, via_resolvent), 1e-3);
  }
}

TEST(BirmanSchwinger, DiscreteTraceConvergesToTrace) {
  const BSKernelSpec spec{0.1, 1.5, compact_table(), {}};
  const double exact = trace_qe(spec).value;
  const double t1 = nystrom_trace(spec, 200);
  const double t2 = nystrom_trace(spec, 400);
  const double t3 = nystrom_trace(spec, 800);
  // the discrete trace misses the spectral tail beyond p_max, which shrinks like 1/rank
  EXPECT_LT(std::abs(t3 - exact), std::abs(t2 - exact));
  EXPECT_LT(std::abs(t2 - exact), std::abs(t1 - exact));
  EXPECT_NEAR((exact - t2) / (exact - t3), 2.0, 0.1);
  EXPECT_LT(relative(2.0 * t3 - t2, exact), 1e-3);
}

TEST(BirmanSchwinger, RejectsInvalidSpecs) {
  EXPECT_THROW(trace_qe(power_spec(0.0, 1.5, 1.2)), PreconditionError);
  EXPECT_THROW(trace_qe(power_spec(0.1, 1.5, 1.8)), PreconditionError);
  EXPECT_THROW(top_eigenvalue_qe(power_spec(0.1, 1.5, 1.2), 100), PreconditionError);
}
