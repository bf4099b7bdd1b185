#include <catch2/catch_amalgamated.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "coolchain/baths.hpp"
#include "coolchain/chain.hpp"
#include "coolchain/constants.hpp"
#include "coolchain/dynamics.hpp"
#include "coolchain/modes.hpp"

using namespace coolchain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent oracle: integrate the full covariance ODE
//   dS/dt = -Omega S - S Omega^T + D
// with classical RK4 from a diagonal initial state.  Slow but shares no
// machinery with the closed-form eigenbasis propagation.
Eigen::MatrixXd rk4_covariance(const Eigen::MatrixXd& omega,
                               const std::vector<double>& gamma,
                               const std::vector<double>& theta,
                               const MomentProfile& init, double t_end,
                               double h = 2e-3) {
  const int n = static_cast<int>(gamma.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) d(n + i, n + i) = 2.0 * gamma[i] * theta[i];
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    s(i, i) = init.xx[i];
    s(n + i, n + i) = init.pp[i];
  }
  auto f = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return -omega * x - x * omega.transpose() + d;
  };
  const long steps = std::lround(t_end / h);
  const double h_actual = t_end / steps;
  for (long k = 0; k < steps; ++k) {
    const Eigen::MatrixXd k1 = f(s);
    const Eigen::MatrixXd k2 = f(s + 0.5 * h_actual * k1);
    const Eigen::MatrixXd k3 = f(s + 0.5 * h_actual * k2);
    const Eigen::MatrixXd k4 = f(s + h_actual * k3);
    s += h_actual / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return s;
}

struct TestChain {
  ModeMatrix matrix;
  std::vector<double> gamma;
  std::vector<double> theta;
  DriftSpectrum spec;
};

TestChain three_ion_chain() {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 3);
  TestChain c{build_mode_matrix(eq, Direction::Axial),
              {0.3, 0.0, 0.12},
              {1.2, 3.4, 0.7},
              {}};
  c.spec = spectral_decomposition(c.matrix, c.gamma);
  return c;
}

}  // namespace

TEST_CASE("moment propagation returns the initial state at t = 0",
          "[dynamics]") {
  TestChain c = three_ion_chain();
  MomentProfile init;
  init.xx = {0.5, 0.1, 0.9};
  init.pp = {0.2, 0.8, 0.4};
  const MomentProfile at0 =
      SecondMomentKernel(c.spec, c.theta, init, 1.0).profile_at(0.0);
  for (int i = 0; i < 3; ++i) {
    CHECK_THAT(at0.xx[i], WithinRel(init.xx[i], 1e-10));
    CHECK_THAT(at0.pp[i], WithinRel(init.pp[i], 1e-10));
  }
}

TEST_CASE("single damped ion matches the covariance ODE", "[dynamics]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.3}, 1);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const std::vector<double> gamma{0.4}, theta{0.8};
  const DriftSpectrum spec = spectral_decomposition(a, gamma);

  MomentProfile init;
  init.xx = {0.3};
  init.pp = {0.1};
  SecondMomentKernel kernel(spec, theta, init, 1.0);

  const Eigen::MatrixXd drift = build_drift_matrix(a, gamma);
  for (double t : {0.5, 2.0, 10.0, 50.0}) {
    const Eigen::MatrixXd s = rk4_covariance(drift, gamma, theta, init, t);
    const MomentProfile prof = kernel.profile_at(t);
    CHECK_THAT(prof.xx[0], WithinRel(s(0, 0), 1e-7));
    CHECK_THAT(prof.pp[0], WithinRel(s(1, 1), 1e-7));
  }

  // And the t -> infinity limit is the textbook stationary pair.
  const MomentProfile steady = kernel.steady_profile();
  CHECK_THAT(steady.xx[0], WithinRel(0.8 / (1.3 * 1.3), 1e-10));
  CHECK_THAT(steady.pp[0], WithinRel(0.8, 1e-10));
}

TEST_CASE("three-ion transients match the covariance ODE", "[dynamics]") {
  TestChain c = three_ion_chain();
  MomentProfile init;
  init.xx = {0.5, 0.1, 0.9};
  init.pp = {0.2, 0.8, 0.4};
  SecondMomentKernel kernel(c.spec, c.theta, init, 1.0);
  const Eigen::MatrixXd drift = build_drift_matrix(c.matrix, c.gamma);

  for (double t : {0.3, 1.7, 6.0, 25.0}) {
    const Eigen::MatrixXd s =
        rk4_covariance(drift, c.gamma, c.theta, init, t);
    const MomentProfile prof = kernel.profile_at(t);
    for (int i = 0; i < 3; ++i) {
      CHECK_THAT(prof.xx[i], WithinRel(s(i, i), 1e-6));
      CHECK_THAT(prof.pp[i], WithinRel(s(3 + i, 3 + i), 1e-6));
    }
  }

  // The alpha^2 boundary scaling is a plain overall factor.
  const double alpha = 2e-3;
  MomentProfile init_scaled;
  for (int i = 0; i < 3; ++i) {
    init_scaled.xx.push_back(init.xx[i] * alpha * alpha);
    init_scaled.pp.push_back(init.pp[i] * alpha * alpha);
  }
  SecondMomentKernel scaled(c.spec, c.theta, init_scaled, alpha);
  const MomentProfile a1 = kernel.profile_at(1.7);
  const MomentProfile a2 = scaled.profile_at(1.7);
  for (int i = 0; i < 3; ++i)
    CHECK_THAT(a2.xx[i], WithinRel(a1.xx[i] * alpha * alpha, 1e-12));
}

TEST_CASE("series evaluation agrees with single-time profiles", "[dynamics]") {
  TestChain c = three_ion_chain();
  MomentProfile init;
  init.xx = {0.5, 0.1, 0.9};
  init.pp = {0.2, 0.8, 0.4};
  SecondMomentKernel kernel(c.spec, c.theta, init, 1.0);

  const std::vector<double> times{0.0, 0.7, 3.1, 12.0};
  const std::vector<int> ions{0, 1, 2};
  const TimeSeries series =
      evolve_second_moments(c.spec, c.theta, init, times, ions);
  for (size_t k = 0; k < times.size(); ++k) {
    const MomentProfile prof = kernel.profile_at(times[k]);
    for (int i = 0; i < 3; ++i)
      CHECK_THAT(series.xx(k, i), WithinRel(prof.xx[i], 1e-10));
  }
}

TEST_CASE("all steady-state routes agree", "[dynamics]") {
  TestChain c = three_ion_chain();
  const MomentProfile direct = steady_state(c.spec, c.theta);
  const MomentProfile lyap =
      steady_state_lyapunov(c.matrix, c.gamma, c.theta);
  for (int i = 0; i < 3; ++i) {
    CHECK_THAT(lyap.xx[i], WithinRel(direct.xx[i], 1e-9));
    CHECK_THAT(lyap.pp[i], WithinRel(direct.pp[i], 1e-9));
  }

  // Long-time propagation converges onto the same profile.
  MomentProfile init;
  init.xx = {0.5, 0.1, 0.9};
  init.pp = {0.2, 0.8, 0.4};
  SecondMomentKernel kernel(c.spec, c.theta, init, 1.0);
  const MomentProfile late = kernel.profile_at(600.0);
  for (int i = 0; i < 3; ++i)
    CHECK_THAT(late.xx[i], WithinRel(direct.xx[i], 1e-5));
}

TEST_CASE("steady state is independent of the initial condition",
          "[dynamics]") {
  TestChain c = three_ion_chain();
  MomentProfile cold, hot;
  cold.xx = {0.01, 0.01, 0.01};
  cold.pp = {0.01, 0.01, 0.01};
  hot.xx = {30.0, 10.0, 50.0};
  hot.pp = {40.0, 20.0, 10.0};
  const double t = 700.0;
  const MomentProfile a = SecondMomentKernel(c.spec, c.theta, cold, 1.0)
                              .profile_at(t);
  const MomentProfile b = SecondMomentKernel(c.spec, c.theta, hot, 1.0)
                              .profile_at(t);
  for (int i = 0; i < 3; ++i) CHECK_THAT(a.xx[i], WithinRel(b.xx[i], 1e-4));
}

TEST_CASE("undamped evolution oscillates without secular growth",
          "[dynamics]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 1);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const DriftSpectrum spec = spectral_decomposition(a, {0.0});

  MomentProfile init;
  init.xx = {0.7};
  init.pp = {0.2};
  SecondMomentKernel kernel(spec, {0.0}, init, 1.0);

  // <x^2>(t) = xx0 cos^2 + pp0 sin^2 / omega^2, period pi/omega.
  for (double t : {0.3, 1.1, 2.9, 7.7}) {
    const double expect = 0.7 * std::cos(t) * std::cos(t) +
                          0.2 * std::sin(t) * std::sin(t);
    CHECK_THAT(kernel.profile_at(t).xx[0], WithinRel(expect, 1e-9));
    CHECK_THAT(kernel.profile_at(t + coolchain::constants::pi).xx[0],
               WithinRel(expect, 1e-9));
  }
  CHECK_THROWS_AS(kernel.steady_profile(), no_steady_state);
}

TEST_CASE("undamped pair noise triggers the secular-term guard",
          "[dynamics]") {
  // Hand-built spectrum with lambda = +-i and a noise drive overlapping the
  // vanishing pair sum: the propagator must refuse rather than emit a
  // secular term.
  DriftSpectrum spec;
  spec.lambda.resize(2);
  spec.lambda << std::complex<double>(0, 1), std::complex<double>(0, -1);
  spec.u = Eigen::MatrixXcd::Identity(2, 2);
  Eigen::MatrixXcd u_inv(2, 2);
  u_inv << 0.6, 0.8, 0.8, -0.6;
  spec.u_inv = u_inv;
  spec.gamma = {0.5};

  MomentProfile init;
  init.xx = {0.1};
  init.pp = {0.1};
  CHECK_THROWS_AS(SecondMomentKernel(spec, {1.0}, init, 1.0), singular_term);
}

TEST_CASE("thermal profile limits", "[dynamics]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.4}, 1);
  const NormalModes m = normal_modes(build_mode_matrix(eq, Direction::Axial));
  const double alpha = 2e-3;

  // Ground state at T = 0.
  const MomentProfile gs = thermal_equilibrium_profile(m, 0.0, alpha);
  CHECK_THAT(gs.xx[0], WithinRel(alpha * alpha / (2 * 1.4), 1e-12));
  CHECK_THAT(gs.pp[0], WithinRel(alpha * alpha * 1.4 / 2, 1e-12));

  // Classical equipartition at high temperature.
  const double t = 1400.0;
  const MomentProfile cl = thermal_equilibrium_profile(m, t, alpha);
  CHECK_THAT(cl.xx[0], WithinRel(alpha * alpha * t / (1.4 * 1.4), 1e-4));
  CHECK_THAT(cl.pp[0], WithinRel(alpha * alpha * t, 1e-4));
}

TEST_CASE("uniform baths reproduce the thermal profile classically",
          "[dynamics]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 4);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const NormalModes m = normal_modes(a);
  const std::vector<double> gamma(4, 0.1);
  const double t = 1e4;  // classical: far above every mode frequency
  const std::vector<double> theta = noise_strengths(m, std::vector<double>(4, t));
  const DriftSpectrum spec = spectral_decomposition(a, gamma);

  const MomentProfile steady = steady_state(spec, theta);
  const MomentProfile thermal = thermal_equilibrium_profile(m, t, 1.0);
  for (int i = 0; i < 4; ++i) {
    CHECK_THAT(steady.xx[i], WithinRel(thermal.xx[i], 1e-6));
    CHECK_THAT(steady.pp[i], WithinRel(thermal.pp[i], 1e-6));
  }
}

TEST_CASE("local baths deviate from the thermal profile at quantum "
          "temperatures", "[dynamics]") {
  // Site-local damping with a site-diagonal noise floor is not an exact
  // thermal bath once mode frequencies are resolved (omega ~ T): the
  // stationary profile differs from the Gibbs one at a small but real
  // level.  Pin that deviation window so any change to either route shows.
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 4);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const NormalModes m = normal_modes(a);
  const std::vector<double> gamma(4, 0.1);
  const double t = 1.0;
  const std::vector<double> theta =
      noise_strengths(m, std::vector<double>(4, t));
  const MomentProfile steady =
      steady_state(spectral_decomposition(a, gamma), theta);
  const MomentProfile thermal = thermal_equilibrium_profile(m, t, 1.0);

  double worst = 0;
  for (int i = 0; i < 4; ++i)
    worst = std::max(worst,
                     std::abs(steady.xx[i] / thermal.xx[i] - 1.0));
  CHECK(worst > 1e-5);
  CHECK(worst < 0.5);
}

TEST_CASE("steady moments grow monotonically with bath strength",
          "[dynamics]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 5);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const NormalModes m = normal_modes(a);
  CoolingConfig config{EdgeCooling{1}, 0.1, 20.0};

  // The zero-temperature-baths profile is a floor for any temperatures.
  const BathAssignment baths = assign_baths(config, 5, 1e-4, 200.0);
  const DriftSpectrum spec = spectral_decomposition(a, baths.gamma);
  const MomentProfile warm =
      steady_state(spec, noise_strengths(m, baths.temperature));
  const MomentProfile floor =
      steady_state(spec, noise_strengths(m, std::vector<double>(5, 0.0)));
  for (int i = 0; i < 5; ++i) {
    CHECK(warm.xx[i] >= floor.xx[i] * (1 - 1e-12));
    CHECK(floor.xx[i] > 0);
  }

  // And monotone in kappa at fixed t_bg.
  double prev = 0;
  for (double kappa : {1e-5, 1e-4, 1e-3}) {
    const BathAssignment b = assign_baths(config, 5, kappa, 200.0);
    const MomentProfile s = steady_state(
        spectral_decomposition(a, b.gamma), noise_strengths(m, b));
    CHECK(s.xx[2] > prev);
    prev = s.xx[2];
  }
}

TEST_CASE("worst-case background profile saturates and bounds", "[dynamics]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 5);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const NormalModes m = normal_modes(a);
  CoolingConfig config{EdgeCooling{1}, 0.1, 20.0};
  const double kappa = 1e-4;

  const UpperBoundResult bound =
      upper_bound_profile(a, m, config, kappa, 1.0);
  CHECK(bound.t_bg_reached > 0);

  for (double t_bg : {50.0, 500.0, 5000.0}) {
    const BathAssignment b = assign_baths(config, 5, kappa, t_bg);
    const MomentProfile s = steady_state(
        spectral_decomposition(a, b.gamma), noise_strengths(m, b));
    for (int i = 0; i < 5; ++i)
      CHECK(s.xx[i] <= bound.profile.xx[i] * (1 + 2e-3));
  }

  // kappa = 0: no background anywhere, the bound is just the cooled chain.
  const UpperBoundResult ideal =
      upper_bound_profile(a, m, config, 0.0, 1.0);
  const BathAssignment b0 = assign_baths(config, 5, 0.0, 1.0);
  const MomentProfile s0 = steady_state(
      spectral_decomposition(a, b0.gamma), noise_strengths(m, b0));
  for (int i = 0; i < 5; ++i)
    CHECK_THAT(ideal.profile.xx[i], WithinRel(s0.xx[i], 1e-12));
}
