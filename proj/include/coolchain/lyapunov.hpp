#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <string>

#include "coolchain/errors.hpp"

namespace coolchain {

// Solves the continuous Lyapunov equation  A X + X A^T + Q = 0  for real
// square A and symmetric Q, by Bartels-Stewart on the complex Schur form:
// with A = Z T Z^H the transformed equation T Y + Y T^H + Z^H Q Z = 0 has
// upper-triangular T, so Y follows from scalar back-substitution and
// X = Re(Z Y Z^H).  Requires that no two eigenvalues of A sum to zero
// (guaranteed when A is Hurwitz), otherwise no unique solution exists.
//
// This route shares nothing with the eigenvector-based moment propagation,
// which is the point: it serves as an independent stationarity check.
inline Eigen::MatrixXd solve_continuous_lyapunov(const Eigen::MatrixXd& a,
                                                 const Eigen::MatrixXd& q) {
  const int m = static_cast<int>(a.rows());
  if (a.cols() != m || q.rows() != m || q.cols() != m)
    throw invalid_input("lyapunov solver needs square matrices of equal size");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, q.cwiseAbs().maxCoeff()))
    throw invalid_input("lyapunov solver needs symmetric Q");

  using Cplx = std::complex<double>;
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(a.cast<Cplx>());
  if (schur.info() != Eigen::Success)
    throw numerical_inconsistency("lyapunov solver: Schur decomposition failed");
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& z = schur.matrixU();

  Eigen::MatrixXcd c = -(z.adjoint() * q.cast<Cplx>() * z);
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(m, m);

  const double eig_scale = std::max(1e-300, t.diagonal().cwiseAbs().maxCoeff());
  for (int i = m - 1; i >= 0; --i) {
    for (int j = m - 1; j >= 0; --j) {
      Cplx rhs = c(i, j);
      for (int k = i + 1; k < m; ++k) rhs -= t(i, k) * y(k, j);
      for (int k = j + 1; k < m; ++k) rhs -= y(i, k) * std::conj(t(j, k));
      const Cplx denom = t(i, i) + std::conj(t(j, j));
      if (std::abs(denom) < 1e-12 * eig_scale)
        throw no_steady_state(
            "lyapunov solver: eigenvalue pair sums to zero (undamped or "
            "unstable mode)");
      y(i, j) = rhs / denom;
    }
  }

  return (z * y * z.adjoint()).real();
}

// Relative residual of a candidate solution, for verification.
inline double lyapunov_residual(const Eigen::MatrixXd& a,
                                const Eigen::MatrixXd& q,
                                const Eigen::MatrixXd& x) {
  return (a * x + x * a.transpose() + q).norm() / std::max(1e-300, q.norm());
}

}  // namespace coolchain
