#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "coolchain/chain.hpp"
#include "coolchain/dynamics.hpp"
#include "coolchain/modes.hpp"
#include "coolchain/relaxation.hpp"

using namespace coolchain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Dense series of delta(t)^2 for one ion from a lambda.
template <typename F>
TimeSeries make_series(double t_end, double dt, F delta) {
  TimeSeries s;
  s.ions = {0};
  const long n = std::lround(t_end / dt);
  s.xx.resize(n, 1);
  for (long k = 0; k < n; ++k) {
    const double t = k * dt;
    s.times.push_back(t);
    const double d = delta(t);
    s.xx(k, 0) = d * d;
  }
  return s;
}

}  // namespace

TEST_CASE("coarse graining of a constant series", "[relaxation]") {
  const TimeSeries s =
      make_series(1000.0, 1.0, [](double) { return 2.5; });
  const CoarseSeries c = coarse_grain(s);
  REQUIRE(c.windows() >= 7);
  for (int k = 0; k < c.windows(); ++k) {
    CHECK_THAT(c.mean(k, 0), WithinRel(2.5, 1e-12));
    CHECK_THAT(c.upper(k, 0), WithinRel(2.5, 1e-12));
    CHECK_THAT(c.lower(k, 0), WithinRel(2.5, 1e-12));
  }
  CHECK_THAT(c.centers[0], WithinRel(0.5 * c.window, 1e-12));
  CHECK_THAT(c.centers[1] - c.centers[0], WithinRel(c.window, 1e-12));
}

TEST_CASE("coarse graining catches envelopes of an oscillation",
          "[relaxation]") {
  const TimeSeries s = make_series(
      2000.0, 0.2, [](double t) { return 1.0 + 0.5 * std::sin(t); });
  const CoarseSeries c = coarse_grain(s);
  for (int k = 0; k < c.windows() - 1; ++k) {  // last window may be partial
    CHECK_THAT(c.upper(k, 0), WithinAbs(1.5, 0.01));
    CHECK_THAT(c.lower(k, 0), WithinAbs(0.5, 0.01));
    CHECK_THAT(c.mean(k, 0), WithinAbs(1.0, 0.02));
  }
}

TEST_CASE("relaxation time of an exponentially settling envelope",
          "[relaxation]") {
  // delta(t) = A (1 + b e^{-rt} |cos t|): the envelope leaves the 1% band
  // when b e^{-rt} drops below 0.01, at t = ln(b/0.01)/r.
  const double a = 3.0, b = 0.2, r = 0.01;
  const TimeSeries s = make_series(3000.0, 0.5, [=](double t) {
    return a * (1.0 + b * std::exp(-r * t) * std::abs(std::cos(t)));
  });
  const CoarseSeries c = coarse_grain(s);
  const double tau = relaxation_time(c, 0, a, 0.01);
  const double expected = std::log(b / 0.01) / r;  // about 300
  CHECK_THAT(tau, WithinAbs(expected, 1.5 * c.window));

  // A series that is settled from the start reports zero.
  const TimeSeries flat = make_series(2000.0, 1.0, [=](double) { return a; });
  CHECK(relaxation_time(coarse_grain(flat), 0, a, 0.01) == 0.0);

  // One that never settles throws, carrying how far off it still is.
  const TimeSeries off =
      make_series(2000.0, 1.0, [=](double) { return 1.1 * a; });
  try {
    relaxation_time(coarse_grain(off), 0, a, 0.01);
    FAIL("expected not_relaxed");
  } catch (const not_relaxed& e) {
    CHECK_THAT(e.discrepancy, WithinAbs(0.1, 0.01));
  }
}

TEST_CASE("adaptive scan agrees with a dense coarse-grained series",
          "[relaxation]") {
  // Small chain relaxing from a cold start towards a driven steady state.
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 3);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const std::vector<double> gamma{0.02, 0.005, 0.02};
  const std::vector<double> theta{0.5, 5.0, 0.5};
  const DriftSpectrum spec = spectral_decomposition(a, gamma);

  MomentProfile init;
  init.xx = {0.05, 0.05, 0.05};
  init.pp = {0.05, 0.05, 0.05};
  SecondMomentKernel kernel(spec, theta, init, 1.0);
  const MomentProfile steady = kernel.steady_profile();

  const std::vector<int> ions{0, 1, 2};
  const RelaxationScanResult scan = relaxation_scan(kernel, steady, ions);
  CHECK(scan.tau > default_coarse_window);

  // Brute force reference: dense evaluation, plain coarse graining.
  const double t_end = 3.0 * scan.tau + 10 * default_coarse_window;
  std::vector<double> times;
  for (double t = 0; t < t_end; t += default_coarse_window / 32)
    times.push_back(t);
  const TimeSeries dense =
      evolve_second_moments(spec, theta, init, times, ions);
  const CoarseSeries coarse = coarse_grain(dense);
  double tau_dense = 0;
  for (int j = 0; j < 3; ++j)
    tau_dense = std::max(
        tau_dense,
        relaxation_time(coarse, j, std::sqrt(steady.xx[ions[j]]), 0.01));

  CHECK_THAT(scan.tau, WithinAbs(tau_dense, 2.5 * default_coarse_window));

  // Per-ion times are bounded by the overall one and detect the quick ions.
  for (double tj : scan.tau_per_ion) CHECK(tj <= scan.tau);

  // A single ion started exactly at its stationary moments (where the
  // diagonal description is complete) settles instantly.
  const ChainEquilibrium one = solve_equilibrium(HarmonicTrap{1.0}, 1);
  const ModeMatrix a1 = build_mode_matrix(one, Direction::Axial);
  const DriftSpectrum spec1 = spectral_decomposition(a1, {0.1});
  const MomentProfile steady1 = steady_state(spec1, {2.0});
  SecondMomentKernel settled(spec1, {2.0}, steady1, 1.0);
  const RelaxationScanResult zero = relaxation_scan(settled, steady1, {0});
  CHECK(zero.tau == 0.0);
}
