#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <vector>

#include "coolchain/chain.hpp"
#include "coolchain/modes.hpp"

using namespace coolchain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("two-ion mode frequencies are the textbook ones", "[modes]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 2);

  const NormalModes axial = normal_modes(build_mode_matrix(eq, Direction::Axial));
  CHECK_THAT(axial.omega[0], WithinRel(1.0, 1e-10));            // centre of mass
  CHECK_THAT(axial.omega[1], WithinRel(std::sqrt(3.0), 1e-10)); // breathing

  const double wx = 3.0;
  const NormalModes trans =
      normal_modes(build_mode_matrix(eq, Direction::Transverse, wx));
  CHECK_THAT(trans.omega[1], WithinRel(wx, 1e-10));             // centre of mass
  CHECK_THAT(trans.omega[0], WithinRel(std::sqrt(wx * wx - 1.0), 1e-10));
}

TEST_CASE("three-ion axial spectrum", "[modes]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 3);
  const NormalModes m = normal_modes(build_mode_matrix(eq, Direction::Axial));
  CHECK_THAT(m.omega[0], WithinRel(1.0, 1e-9));
  CHECK_THAT(m.omega[1], WithinRel(std::sqrt(3.0), 1e-9));
  CHECK_THAT(m.omega[2], WithinRel(std::sqrt(29.0 / 5.0), 1e-9));
}

TEST_CASE("mode vectors are orthonormal and reconstruct the matrix",
          "[modes]") {
  const ChainEquilibrium eq = solve_equilibrium(QuarticTrap{-1.0, 0.5}, 10);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const NormalModes m = normal_modes(a);

  const Eigen::MatrixXd eye =
      m.g.transpose() * m.g - Eigen::MatrixXd::Identity(10, 10);
  CHECK(eye.cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::MatrixXd rec =
      m.g * m.omega.cwiseProduct(m.omega).asDiagonal() * m.g.transpose();
  CHECK((rec - a.entries).cwiseAbs().maxCoeff() < 1e-9);

  // The harmonic centre-of-mass mode is uniform with frequency omega_z.
  const ChainEquilibrium harm = solve_equilibrium(HarmonicTrap{0.8}, 10);
  const NormalModes hm =
      normal_modes(build_mode_matrix(harm, Direction::Axial));
  CHECK_THAT(hm.omega[0], WithinRel(0.8, 1e-9));
  for (int i = 0; i < 10; ++i)
    CHECK_THAT(hm.g(i, 0), WithinRel(1.0 / std::sqrt(10.0), 1e-8));
}

TEST_CASE("transverse spectrum is capped by the confinement", "[modes]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 10);
  const double wx = 5.0;
  const NormalModes m =
      normal_modes(build_mode_matrix(eq, Direction::Transverse, wx));
  for (int k = 0; k < m.size(); ++k) CHECK(m.omega[k] <= wx * (1 + 1e-12));
  // Coulomb repulsion softens transverse motion, so the top mode is the
  // centre of mass at exactly omega_x.
  CHECK_THAT(m.omega[m.size() - 1], WithinRel(wx, 1e-10));
}

TEST_CASE("weak transverse confinement triggers the zig-zag error",
          "[modes]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 2);
  // Critical point for two ions: omega_x^2 = 1/r^3 difference = 1.
  CHECK_THROWS_AS(
      normal_modes(build_mode_matrix(eq, Direction::Transverse, 0.99)),
      instability_detected);
  CHECK_THROWS_AS(
      normal_modes(build_mode_matrix(eq, Direction::Transverse, 1.0)),
      instability_detected);
  CHECK_NOTHROW(
      normal_modes(build_mode_matrix(eq, Direction::Transverse, 1.2)));
}

TEST_CASE("drift matrix layout", "[modes]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 3);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const std::vector<double> gamma{0.1, 0.0, 0.3};
  const Eigen::MatrixXd omega = build_drift_matrix(a, gamma);

  CHECK((omega.topLeftCorner(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((omega.topRightCorner(3, 3) + Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((omega.bottomLeftCorner(3, 3) - a.entries).cwiseAbs().maxCoeff() ==
        0.0);
  for (int i = 0; i < 3; ++i)
    CHECK(omega(3 + i, 3 + i) == gamma[i]);

  CHECK_THROWS_AS(build_drift_matrix(a, {0.1, 0.2}), invalid_input);
  CHECK_THROWS_AS(build_drift_matrix(a, {0.1, -0.2, 0.3}), invalid_input);
}

TEST_CASE("single-ion drift spectrum is analytic", "[modes]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 1);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const double g = 0.1;
  const DriftSpectrum spec = spectral_decomposition(a, {g});

  // lambda = gamma/2 -+ i sqrt(omega^2 - gamma^2/4) for underdamped motion.
  const double re = g / 2;
  const double im = std::sqrt(1.0 - g * g / 4);
  CHECK_THAT(spec.lambda[0].real(), WithinRel(re, 1e-10));
  CHECK_THAT(spec.lambda[1].real(), WithinRel(re, 1e-10));
  CHECK_THAT(std::abs(spec.lambda[0].imag()), WithinRel(im, 1e-10));
  CHECK(spec.lambda[0].imag() * spec.lambda[1].imag() < 0);
}

TEST_CASE("drift spectrum properties", "[modes]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 4);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  const std::vector<double> gamma{0.1, 0.02, 0.0, 0.3};
  const DriftSpectrum spec = spectral_decomposition(a, gamma);

  // Eigenvalue sum equals the drift trace, i.e. the damping sum.
  std::complex<double> sum = 0;
  for (int i = 0; i < 8; ++i) sum += spec.lambda[i];
  CHECK_THAT(sum.real(), WithinAbs(0.1 + 0.02 + 0.0 + 0.3, 1e-9));
  CHECK_THAT(sum.imag(), WithinAbs(0.0, 1e-9));

  // Real matrix: eigenvalues close under conjugation.
  for (int i = 0; i < 8; ++i) {
    const std::complex<double> conj = std::conj(spec.lambda[i]);
    double best = 1e300;
    for (int j = 0; j < 8; ++j)
      best = std::min(best, std::abs(spec.lambda[j] - conj));
    CHECK(best < 1e-9);
  }
  CHECK_FALSE(spec.ill_conditioned);

  // Uniform damping shifts every undamped mode pair by gamma/2.
  const std::vector<double> uni(4, 0.2);
  const DriftSpectrum uspec = spectral_decomposition(a, uni);
  const NormalModes m = normal_modes(a);
  std::vector<double> expected;
  for (int k = 0; k < 4; ++k) {
    const double wk = m.omega[k];
    expected.push_back(std::sqrt(wk * wk - 0.01));
  }
  for (int i = 0; i < 8; ++i)
    CHECK_THAT(uspec.lambda[i].real(), WithinRel(0.1, 1e-8));
  for (double im : expected) {
    double best = 1e300;
    for (int i = 0; i < 8; ++i)
      best = std::min(best, std::abs(std::abs(uspec.lambda[i].imag()) - im));
    CHECK(best < 1e-8);
  }

  // Zero damping: purely imaginary spectrum at the mode frequencies.
  const DriftSpectrum zspec = spectral_decomposition(a, {0, 0, 0, 0});
  for (int i = 0; i < 8; ++i)
    CHECK_THAT(zspec.lambda[i].real(), WithinAbs(0.0, 1e-10));
}

TEST_CASE("critically damped single ion is flagged degenerate", "[modes]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 1);
  const ModeMatrix a = build_mode_matrix(eq, Direction::Axial);
  // gamma = 2 omega makes the 2x2 drift a Jordan block.
  CHECK_THROWS_AS(spectral_decomposition(a, {2.0}), degenerate_spectrum);
  // The advertised remedy works.
  CHECK_NOTHROW(spectral_decomposition(a, {2.0 * (1 + 1e-6)}));
}
