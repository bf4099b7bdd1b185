#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "coolchain/chain.hpp"
#include "coolchain/errors.hpp"

namespace coolchain {

enum class Direction { Axial, Transverse };

inline const char* to_string(Direction d) {
  return d == Direction::Axial ? "axial" : "transverse";
}

// ---------------------------------------------------------------------------
// Mode matrices.  Small displacements about the equilibrium obey
// qdd_i = -sum_j A_ij q_j with
//   A_ij = C / |z_j - z_i|^3          (i != j)
//   A_ii = beta_i - sum_{j!=i} C / |z_j - z_i|^3
// where C = 1 transversally (Coulomb softens the confinement) and C = -2
// axially (Coulomb stiffens it), beta_i = omega_x^2 transversally and the
// local trap curvature axially.
// ---------------------------------------------------------------------------

struct ModeMatrix {
  Direction direction = Direction::Axial;
  Eigen::MatrixXd entries;
  double omega_x = 0;  // transverse confinement; unused axially

  int size() const { return static_cast<int>(entries.rows()); }
};

inline ModeMatrix build_mode_matrix(const ChainEquilibrium& eq,
                                    Direction direction,
                                    std::optional<double> omega_x = {}) {
  const int n = eq.size();
  ModeMatrix m;
  m.direction = direction;
  m.entries = Eigen::MatrixXd::Zero(n, n);

  double coupling = 0;
  if (direction == Direction::Transverse) {
    if (!omega_x || *omega_x <= 0)
      throw invalid_input("transverse mode matrix needs omega_x > 0");
    m.omega_x = *omega_x;
    coupling = 1.0;
    for (int i = 0; i < n; ++i) m.entries(i, i) = m.omega_x * m.omega_x;
  } else {
    coupling = -2.0;
    for (int i = 0; i < n; ++i) m.entries(i, i) = eq.axial_curvatures[i];
  }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = std::abs(eq.positions[j] - eq.positions[i]);
      const double c = coupling / (r * r * r);
      m.entries(i, j) = c;
      m.entries(i, i) -= c;
    }
  return m;
}

// ---------------------------------------------------------------------------
// Normal modes: A = G diag(omega^2) G^T with orthonormal columns of G.
// ---------------------------------------------------------------------------

struct NormalModes {
  Direction direction = Direction::Axial;
  Eigen::MatrixXd g;       // column k is mode k's ion amplitudes
  Eigen::VectorXd omega;   // ascending mode frequencies

  int size() const { return static_cast<int>(omega.size()); }
};

inline NormalModes normal_modes(const ModeMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.entries);
  if (solver.info() != Eigen::Success)
    throw numerical_inconsistency("mode matrix eigensolve failed");

  const double scale =
      std::max(1.0, m.entries.cwiseAbs().maxCoeff());
  const double floor = 1e-12 * scale;
  if (solver.eigenvalues()[0] <= floor) {
    if (m.direction == Direction::Transverse)
      throw instability_detected(
          "transverse confinement too weak: zig-zag instability (lowest "
          "omega^2 = " + std::to_string(solver.eigenvalues()[0]) + ")");
    throw instability_detected(
        "axial mode matrix not positive definite (lowest omega^2 = " +
        std::to_string(solver.eigenvalues()[0]) + ")");
  }

  NormalModes modes;
  modes.direction = m.direction;
  modes.g = solver.eigenvectors();
  modes.omega = solver.eigenvalues().cwiseSqrt();
  // Fix the sign ambiguity: make the largest-magnitude component of each
  // mode positive so decompositions are reproducible across runs.
  for (int k = 0; k < modes.size(); ++k) {
    int imax = 0;
    modes.g.col(k).cwiseAbs().maxCoeff(&imax);
    if (modes.g(imax, k) < 0) modes.g.col(k) = -modes.g.col(k);
  }
  return modes;
}

// ---------------------------------------------------------------------------
// Drift matrix of the damped chain.  With phase-space order (x_1..x_N,
// p_1..p_N) the linear Langevin dynamics dq/dt = -Omega q + noise has
//
//   Omega = [ 0   -I  ]
//           [ A  diag(gamma) ]
//
// so position rows integrate momenta and momentum rows feel the restoring
// force and local friction.
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd build_drift_matrix(const ModeMatrix& m,
                                          const std::vector<double>& gamma) {
  const int n = m.size();
  if (static_cast<int>(gamma.size()) != n)
    throw invalid_input("drift matrix: gamma size mismatch");
  for (double g : gamma)
    if (g < 0) throw invalid_input("drift matrix: negative damping rate");

  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  omega.bottomLeftCorner(n, n) = m.entries;
  for (int i = 0; i < n; ++i) omega(n + i, n + i) = gamma[i];
  return omega;
}

// ---------------------------------------------------------------------------
// Eigen-decomposition of the (non-symmetric) drift matrix, Omega = U L U^-1.
// The closed-form moment propagation is built on this.
// ---------------------------------------------------------------------------

struct DriftSpectrum {
  Eigen::VectorXcd lambda;   // eigenvalues, sorted by (re, im)
  Eigen::MatrixXcd u;        // right eigenvectors (columns)
  Eigen::MatrixXcd u_inv;
  std::vector<double> gamma; // damping rates the drift matrix was built with
  double condition = 0;      // Frobenius condition estimate of U
  bool ill_conditioned = false;

  int ions() const { return static_cast<int>(lambda.size()) / 2; }
};

inline DriftSpectrum spectral_decomposition(
    const Eigen::MatrixXd& drift, const std::vector<double>& gamma) {
  const int m = static_cast<int>(drift.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> solver(drift);
  if (solver.info() != Eigen::Success)
    throw numerical_inconsistency("drift matrix eigensolve failed");

  // Sort deterministically; conjugate pairs stay adjacent.
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  const Eigen::VectorXcd raw = solver.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (raw[a].real() != raw[b].real()) return raw[a].real() < raw[b].real();
    return raw[a].imag() < raw[b].imag();
  });

  DriftSpectrum spec;
  spec.lambda.resize(m);
  spec.u.resize(m, m);
  for (int i = 0; i < m; ++i) {
    spec.lambda[i] = raw[order[i]];
    spec.u.col(i) = solver.eigenvectors().col(order[i]);
  }
  spec.gamma = gamma;

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(spec.u);
  spec.u_inv = lu.inverse();
  spec.condition = spec.u.norm() * spec.u_inv.norm();
  spec.ill_conditioned = !(spec.condition < 1e10);

  // A near-defective drift matrix makes U^-1 garbage; catch it by checking
  // the reconstruction rather than trusting the condition estimate alone.
  const double rec_err =
      (spec.u * spec.lambda.asDiagonal() * spec.u_inv - drift).norm() /
      std::max(1e-300, drift.norm());
  if (!std::isfinite(rec_err) || rec_err > 1e-8)
    throw degenerate_spectrum(
        "drift matrix is numerically defective (reconstruction error " +
        std::to_string(rec_err) +
        "); perturb one damping rate by ~1e-9 to split the degeneracy");
  return spec;
}

// Convenience overload for the common build-and-decompose step.
inline DriftSpectrum spectral_decomposition(const ModeMatrix& m,
                                            const std::vector<double>& gamma) {
  return spectral_decomposition(build_drift_matrix(m, gamma), gamma);
}

}  // namespace coolchain
