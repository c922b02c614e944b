#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "weaktree/asymptotics.hpp"

using namespace weaktree;

namespace {

SweepReport synthetic(const std::vector<double>& alphas, double (*law)(double)) {
  SweepReport r;
  for (double a : alphas) r.entries.push_back({a, -law(a), 1.0, true, false});
  return r;
}

HalfLineFamily family(double d, double gamma) { return {d, PotentialSpec::exact_power(1.0, gamma), 1.0, {}, {}}; }

double e1_at(double d, double gamma, double alpha) {
  return ground_state_weighted(make_halfline_problem(d, alpha, PotentialSpec::exact_power(1.0, gamma))).e1;
}

}  // namespace

TEST(Sweep, EmptyGridGivesEmptyReport) {
  const std::vector<double> none;
  EXPECT_TRUE(sweep_ground_state(family(1.6, 1.2), none).entries.empty());
}

TEST(Sweep, RejectsUnsortedCouplings) {
  const std::vector<double> up{0.01, 0.1};
  EXPECT_THROW(sweep_ground_state(family(1.6, 1.2), up), PreconditionError);
}

TEST(Sweep, AllBoundAndMonotone) {
  const auto alphas = alpha_grid(1e-3, 1e-1, 10);
  const SweepReport r = sweep_ground_state(family(1.6, 1.2), alphas);
  ASSERT_EQ(r.entries.size(), 10u);
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    EXPECT_TRUE(r.entries[i].converged);
    EXPECT_LT(r.entries[i].e1, 0.0);
    EXPECT_GT(r.entries[i].truncation, 0.0);
    // alphas decrease along the report, so e1 increases
    if (i > 0) {
      EXPECT_GE(r.entries[i].e1, r.entries[i - 1].e1);
    }
  }
}

TEST(Sweep, CsvRoundTripsDoubles) {
  const std::vector<double> alphas{0.1, 0.05};
  const SweepReport r = sweep_ground_state(family(1.6, 1.2), alphas);
  std::ostringstream os;
  write_sweep_csv(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "alpha,e1,truncation,converged");
  std::getline(is, line);
  const double alpha = std::stod(line.substr(0, line.find(',')));
  const std::string rest = line.substr(line.find(',') + 1);
  EXPECT_EQ(alpha, 0.1);
  EXPECT_EQ(std::stod(rest.substr(0, rest.find(','))), r.entries[0].e1);
}

TEST(Fit, ExactPowerData) {
  const SweepReport r = synthetic(alpha_grid(1e-3, 1e-1, 10), [](double a) { return std::pow(a, 2.5); });
  const PowerFit f = fit_power_law(r);
  EXPECT_NEAR(f.exponent, 2.5, 1e-12);
  EXPECT_LT(f.residual, 1e-12);
}

TEST(Fit, NeedsFiveUsableEntries) {
  SweepReport r = synthetic({0.1, 0.05, 0.02, 0.01}, [](double a) { return a * a; });
  EXPECT_THROW(fit_power_law(r), InsufficientDataError);
  r.entries.push_back({0.005, -1e-5, 1.0, false, false});  // not converged: still too few
  EXPECT_THROW(fit_power_law(r), InsufficientDataError);
}

TEST(Fit, ExactLogCorrectedData) {
  const SweepReport r = synthetic(alpha_grid(1e-3, 1e-1, 10), [](double a) { return std::pow(std::abs(a * std::log(a)), 4.0); });
  const LogCorrectedFit f = fit_log_corrected(r, 1.5);
  EXPECT_NEAR(f.ratio_min, 1.0, 1e-12);
  EXPECT_NEAR(f.ratio_max, 1.0, 1e-12);
  EXPECT_NEAR(f.exponent, 4.0, 1e-10);
}

TEST(Fit, LogCorrectedRejectsLargeCoupling) {
  const SweepReport r = synthetic({0.5, 0.2, 0.1, 0.05, 0.02}, [](double a) { return a * a; });
  EXPECT_THROW(fit_log_corrected(r, 1.5), PreconditionError);
}

TEST(Fit, WindowDropsEndpoints) {
  // corrupt the two end entries; the fit must not see them
  SweepReport r = synthetic(alpha_grid(1e-3, 1e-1, 7), [](double a) { return std::pow(a, 3.0); });
  r.entries.front().e1 *= 10.0;
  r.entries.back().e1 *= 0.1;
  EXPECT_NEAR(fit_power_law(r).exponent, 3.0, 1e-12);
}

TEST(WeakCoupling, LocalExponentApproachesPowerLaw) {
  // d = 1.6, gamma = 1.2: local slope of log|e1| tends to 2/(2-gamma) = 2.5 as alpha -> 0
  const double a = 1e-6, b = 1e-7;
  const double slope = std::log(e1_at(1.6, 1.2, a) / e1_at(1.6, 1.2, b)) / std::log(a / b);
  EXPECT_NEAR(slope, 2.5, 0.01);
  EXPECT_NEAR(e1_at(1.6, 1.2, 1e-3), -3.7137148785e-07, 1e-15);
  // d = 2, gamma = 1.5: exponent 4
  const double stiff = std::log(e1_at(2.0, 1.5, 1e-5) / e1_at(2.0, 1.5, 1e-6)) / std::log(10.0);
  EXPECT_NEAR(stiff, 4.0, 0.01);
}

TEST(WeakCoupling, StiffPointWindowExponent) {
  // on [1e-2, 1e-1] the sweep is still short of the limiting exponent 4
  const SweepReport r = sweep_ground_state(family(2.0, 1.5), alpha_grid(1e-2, 1e-1, 10));
  EXPECT_NEAR(fit_power_law(r).exponent, 3.303, 0.005);
}

TEST(WeakCoupling, UnresolvableStateIsFlagged) {
  const SpectralResult r =
      ground_state_weighted(make_halfline_problem(1.5, 1e-6, PotentialSpec::exact_power(1.0, 1.5)));
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(std::isfinite(r.e1));
  // beyond the truncation search range nothing negative is found at all
  const SpectralResult lost =
      ground_state_weighted(make_halfline_problem(2.0, 1e-7, PotentialSpec::exact_power(1.0, 1.5)));
  EXPECT_FALSE(lost.converged);
}

TEST(WeakCoupling, LogCorrectedModelFitsBetter) {
  const SweepReport r = sweep_ground_state(family(1.5, 1.5), alpha_grid(1e-3, 1e-1, 10));
  const PowerFit power = fit_power_law(r);
  const LogCorrectedFit log_fit = fit_log_corrected(r, 1.5);
  EXPECT_GE(power.residual, 2.0 * log_fit.residual);
}

TEST(Variational, KTildeIntegrals) {
  using boost::math::quadrature::exp_sinh;
  const double e1_2 = exp_sinh<double>().integrate([](double x) { return std::exp(-2.0 * x) / x; }, 1.0,
                                                   std::numeric_limits<double>::infinity());
  const double second = exp_sinh<double>().integrate([](double x) { return std::exp(-2.0 * x) * (1.0 + x); }, 0.0,
                                                     std::numeric_limits<double>::infinity());
  EXPECT_NEAR(e1_2, 0.04890051070806112, 1e-14);
  EXPECT_NEAR(second, 0.75, 1e-14);
  for (double k : {0.001, 0.01, 0.03, 0.1}) {
    EXPECT_NEAR(exp_trial_k_tilde(1.2, 1.0, k), std::pow(k, 1.2) * e1_2 - k * k * second, 1e-15);
  }
  // the gamma-power wins only for K below (gamma E1(2) / (2 * 3/4))^{1/(2-gamma)} ~ 0.029
  EXPECT_LT(exp_trial_k_tilde(1.2, 1.0, 0.1), 0.0);
  EXPECT_GT(exp_trial_k_tilde(1.2, 1.0, 0.01), 0.0);
  EXPECT_THROW(variational_bound_exp(1.6, 1.2, 1.0, 1e-2, 0.1), PreconditionError);
}

TEST(Variational, ExpBoundHolds) {
  const VariationalBound b = variational_bound_exp(1.6, 1.2, 1.0, 1e-2);
  EXPECT_GT(exp_trial_k_tilde(1.2, 1.0, b.parameter), 0.0);
  EXPECT_LT(b.rayleigh_quotient, 0.0);
  EXPECT_LE(b.rayleigh_quotient, b.bound);
  EXPECT_GE(b.rayleigh_quotient, e1_at(1.6, 1.2, 1e-2));
}

TEST(Variational, ExpQuotientMatchesClosedForm) {
  // norm and potential integrals in terms of upper incomplete gamma functions
  const double d = 1.6, gamma = 1.2, alpha = 1e-2;
  const VariationalBound b = variational_bound_exp(d, gamma, 1.0, alpha);
  const double delta = b.parameter * std::pow(alpha, 1.0 / (2.0 - gamma));
  const double t = 2.0 * delta;
  const double norm = std::exp(t) * std::pow(t, -d) * boost::math::tgamma(d, t);
  const double pot = std::exp(t) * std::pow(t, gamma - d) * boost::math::tgamma(d - gamma, t);
  EXPECT_NEAR(b.rayleigh_quotient, delta * delta - alpha * pot / norm, 1e-10 * std::abs(b.rayleigh_quotient));
}

TEST(Variational, HatKineticTerm) {
  for (double mu : {3.0, 50.0, 2000.0}) {
    using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double d = 1.5;
    const double numeric = Rule::integrate([&](double x) { return std::pow(1.0 + x, d - 1.0) / (mu * mu); }, 0.0, mu, 10, 1e-13);
    EXPECT_NEAR(hat_kinetic(d, mu), numeric, 1e-12 * numeric);
  }
}

TEST(Variational, HatConstants) {
  const double m = hat_trial_m(1.5, 1.0, 64.0);
  EXPECT_NEAR(m, std::log(32.0) / 4.0 - std::pow(2.0, 1.5) / 1.5 / 8.0, 1e-14);
  EXPECT_GT(m, 0.0);
  EXPECT_EQ(default_hat_beta(1.5, 1.0), 16.0);
  EXPECT_THROW(variational_bound_hat(1.5, 1.0, 1e-2, 4.0), PreconditionError);
}

TEST(Variational, HatBoundHolds) {
  const VariationalBound b = variational_bound_hat(1.5, 1.0, 1e-2);
  EXPECT_LT(b.rayleigh_quotient, 0.0);
  EXPECT_LE(b.rayleigh_quotient, b.bound);
  EXPECT_GE(b.rayleigh_quotient, e1_at(1.5, 1.5, 1e-2));
}

TEST(Variational, HatQuotientMatchesQuadrature) {
  const double d = 1.5, alpha = 1e-2;
  const VariationalBound b = variational_bound_hat(d, 1.0, alpha);
  const double mu = b.parameter / std::pow(std::abs(alpha * std::log(alpha)), 1.0 / (2.0 - d));
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto w = [&](double x) { return 1.0 - x / mu; };
  const double norm = Rule::integrate([&](double x) { return w(x) * w(x) * std::pow(1.0 + x, d - 1.0); }, 0.0, mu, 15, 1e-13);
  const double pot = Rule::integrate([&](double x) { return w(x) * w(x) / (1.0 + x); }, 0.0, mu, 15, 1e-13);
  const double expected = (hat_kinetic(d, mu) - alpha * pot) / norm;
  EXPECT_NEAR(b.rayleigh_quotient, expected, 1e-9 * std::abs(expected));
}

TEST(Chains, UpperBoundAcrossSweep) {
  for (double alpha : alpha_grid(1e-3, 1e-1, 5)) {
    const VariationalBound b = variational_bound_exp(1.6, 1.2, 1.0, alpha);
    EXPECT_LE(e1_at(1.6, 1.2, alpha), b.rayleigh_quotient) << alpha;
    EXPECT_LE(b.rayleigh_quotient, b.bound) << alpha;
  }
}

TEST(Chains, LowerBoundThroughTrace) {
  const PotentialSpec v = PotentialSpec::exact_power(1.0, 1.2);
  const SweepReport r = sweep_ground_state(family(1.6, 1.2), std::vector<double>{0.1, 0.01, 0.001});
  const std::vector<double> traces = traces_at_ground_states(r, 1.6, v);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    EXPECT_LE(1.0 / r.entries[i].alpha, traces[i] * (1.0 + 1e-2)) << r.entries[i].alpha;
  }
}

TEST(Chains, LambertReplay) {
  const PotentialSpec v = PotentialSpec::exact_power(1.0, 1.5);
  const std::vector<double> alphas{0.02, 0.01, 0.005, 0.002};
  const SweepReport r = sweep_ground_state(family(1.5, 1.5), alphas);
  const std::vector<double> traces = traces_at_ground_states(r, 1.5, v);
  std::vector<double> energies;
  for (const SweepEntry& e : r.entries) energies.push_back(-e.e1);
  const LambertReplay replay = lambert_replay(1.5, alphas, energies, traces);
  EXPECT_TRUE(replay.holds);
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    // the replayed bound is the inverse of y e^y >= (2-gamma)/(2 D~ alpha) at equality
    const double y = std::log(std::pow(replay.bounds[i], -0.25));
    EXPECT_NEAR(y * std::exp(y), 0.5 / (2.0 * replay.d_tilde * alphas[i]), 1e-10 * y * std::exp(y));
  }
}

TEST(Chains, ElementaryLogInequality) {
  for (double y : quad::geomspace(1e-8, 1e8, 161)) EXPECT_GE(y - std::log(y), y / 2.0) << y;
}
