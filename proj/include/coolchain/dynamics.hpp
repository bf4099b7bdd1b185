#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "coolchain/baths.hpp"
#include "coolchain/errors.hpp"
#include "coolchain/lyapunov.hpp"
#include "coolchain/modes.hpp"

namespace coolchain {

// Per-ion second moments at one instant.  Values are in units of d0^2 (and
// the momentum analogue) when built with the physical alpha; passing
// alpha = 1 keeps everything in quantum units where the oscillator ground
// state has <x^2> = 1/(2 omega).
struct MomentProfile {
  std::vector<double> xx;
  std::vector<double> pp;

  int size() const { return static_cast<int>(xx.size()); }
  double delta_x(int i) const { return std::sqrt(xx[i]); }
};

// Thermal equilibrium of the ideal chain, all modes at temperature t:
// <x_i^2> = alpha^2 sum_k G_ik^2 / omega_k (n_B + 1/2), and with an extra
// omega_k^2 for the momenta.  n_B + 1/2 = coth(omega/2T)/2.
inline MomentProfile thermal_equilibrium_profile(const NormalModes& modes,
                                                 double t, double alpha) {
  if (t < 0) throw invalid_input("thermal profile needs t >= 0");
  if (alpha <= 0) throw invalid_input("thermal profile needs alpha > 0");
  const int n = modes.size();
  MomentProfile prof;
  prof.xx.assign(n, 0.0);
  prof.pp.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double w = modes.omega[k];
      const double g2 = modes.g(i, k) * modes.g(i, k);
      const double occ = bose_occupation(w, t) + 0.5;
      prof.xx[i] += g2 / w * occ;
      prof.pp[i] += g2 * w * occ;
    }
    prof.xx[i] *= alpha * alpha;
    prof.pp[i] *= alpha * alpha;
  }
  return prof;
}

// ---------------------------------------------------------------------------
// Closed-form propagation of per-ion second moments.
//
// In the eigenbasis Omega = U L U^-1, writing U^-1 = [V | M] (position and
// momentum column blocks) and s_ab = lambda_a + lambda_b, the moments of a
// diagonal initial state evolve as
//
//   <q_mu^2>(t) = sum_ab U_mu,a U_mu,b [ e^{-s_ab t} P_ab + f_ab(t) D_ab ]
//
//   P_ab = sum_s ( <x_s^2>_0 V_as V_bs + <p_s^2>_0 M_as M_bs )
//   D_ab = sum_s 2 gamma_s Theta_s M_as M_bs
//   f_ab(t) = (1 - e^{-s_ab t}) / s_ab
//
// f has a removable limit t as s -> 0; cells where s vanishes are only legal
// when their driving D also vanishes (undamped modes with no noise), which
// the constructor enforces.  Everything here is in quantum units; alpha^2
// scaling happens at the public entry points.
// ---------------------------------------------------------------------------

class SecondMomentKernel {
 public:
  SecondMomentKernel(const DriftSpectrum& spec,
                     const std::vector<double>& theta,
                     const MomentProfile& init, double alpha)
      : alpha_(alpha) {
    const int n = spec.ions();
    const int m = 2 * n;
    if (static_cast<int>(theta.size()) != n)
      throw invalid_input("moment kernel: theta size mismatch");
    if (init.size() != n || static_cast<int>(init.pp.size()) != n)
      throw invalid_input("moment kernel: initial profile size mismatch");
    if (alpha <= 0) throw invalid_input("moment kernel: alpha must be > 0");

    u_ = spec.u;
    lambda_ = spec.lambda;

    const Eigen::MatrixXcd v_blk = spec.u_inv.leftCols(n);
    const Eigen::MatrixXcd m_blk = spec.u_inv.rightCols(n);

    Eigen::VectorXd xx0(n), pp0(n), drive(n);
    for (int i = 0; i < n; ++i) {
      if (init.xx[i] < 0 || init.pp[i] < 0)
        throw invalid_input("moment kernel: negative initial moment");
      xx0[i] = init.xx[i] / (alpha * alpha);
      pp0[i] = init.pp[i] / (alpha * alpha);
      if (theta[i] < 0) throw invalid_input("moment kernel: negative theta");
      drive[i] = 2.0 * spec.gamma[i] * theta[i];
    }

    p_ = v_blk * xx0.asDiagonal() * v_blk.transpose() +
         m_blk * pp0.asDiagonal() * m_blk.transpose();
    d_ = m_blk * drive.asDiagonal() * m_blk.transpose();

    s_.resize(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) s_(a, b) = lambda_[a] + lambda_[b];

    // Vanishing eigenvalue-pair sums are fine only for undriven cells.
    const double s_scale = lambda_.cwiseAbs().maxCoeff();
    const double d_scale = std::max(1e-300, d_.cwiseAbs().maxCoeff());
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        if (std::abs(s_(a, b)) < 1e-12 * std::max(1.0, s_scale)) {
          if (std::abs(d_(a, b)) > 1e-10 * d_scale)
            throw singular_term(
                "moment propagation: eigenvalue pair sums to zero while its "
                "noise drive does not (secular term)");
          d_(a, b) = 0;  // force the removable limit to contribute nothing
        }
      }
  }

  int ions() const { return static_cast<int>(lambda_.size()) / 2; }

  // Full profile at one time.
  MomentProfile profile_at(double t) const {
    const int n = ions();
    const int m = 2 * n;
    Eigen::MatrixXcd z(m, m);
    fill_kernel(t, z);
    const Eigen::MatrixXcd uz = u_ * z;
    MomentProfile prof;
    prof.xx.resize(n);
    prof.pp.resize(n);
    double max_imag = 0;
    for (int mu = 0; mu < m; ++mu) {
      std::complex<double> q2 = 0;
      for (int b = 0; b < m; ++b) q2 += uz(mu, b) * u_(mu, b);
      max_imag = std::max(max_imag, std::abs(q2.imag()));
      (mu < n ? prof.xx[mu] : prof.pp[mu - n]) =
          q2.real() * alpha_ * alpha_;
    }
    check_imag(max_imag, prof);
    return prof;
  }

  // Position second moments for selected ions over a time grid.  Output is
  // (times x ions), in the same d0^2 units as profile_at.
  Eigen::MatrixXd xx_series(const std::vector<double>& times,
                            const std::vector<int>& ions_list) const {
    const int n = ions();
    const int m = 2 * n;
    const int nt = static_cast<int>(times.size());
    const int ni = static_cast<int>(ions_list.size());

    // Per-ion weight matrices for the two kernel terms.
    std::vector<Eigen::MatrixXcd> wp(ni), wd(ni);
    for (int j = 0; j < ni; ++j) {
      const int i = ions_list[j];
      if (i < 0 || i >= n) throw invalid_input("moment series: ion index");
      const Eigen::VectorXcd row = u_.row(i).transpose();
      const Eigen::MatrixXcd outer = row * row.transpose();
      wp[j] = outer.cwiseProduct(p_);
      wd[j] = outer.cwiseProduct(d_);
    }

    Eigen::MatrixXd out(nt, ni);
    Eigen::VectorXcd g(m);
    Eigen::MatrixXcd f(m, m);
    for (int it = 0; it < nt; ++it) {
      const double t = times[it];
      if (t < 0) throw invalid_input("moment series: negative time");
      for (int a = 0; a < m; ++a) g[a] = std::exp(-lambda_[a] * t);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) f(a, b) = f_stable(s_(a, b), g[a] * g[b], t);
      for (int j = 0; j < ni; ++j) {
        std::complex<double> sp = 0, sd = 0;
        for (int a = 0; a < m; ++a) {
          std::complex<double> rp = 0, rd = 0;
          for (int b = 0; b < m; ++b) {
            rp += wp[j](a, b) * g[b];
            rd += wd[j](a, b) * f(a, b);
          }
          sp += g[a] * rp;
          sd += rd;
        }
        const std::complex<double> q2 = sp + sd;
        out(it, j) = q2.real() * alpha_ * alpha_;
        if (std::abs(q2.imag()) >
            1e-6 * std::max(std::abs(q2.real()), 1e-30))
          throw numerical_inconsistency(
              "moment series: imaginary residue above tolerance");
      }
    }
    return out;
  }

  // Stationary profile (t -> infinity limit).  Requires a Hurwitz drift.
  MomentProfile steady_profile() const {
    const int m = static_cast<int>(lambda_.size());
    double min_re = 1e300, max_abs = 0;
    for (int a = 0; a < m; ++a) {
      min_re = std::min(min_re, lambda_[a].real());
      max_abs = std::max(max_abs, std::abs(lambda_[a]));
    }
    if (min_re <= 1e-12 * std::max(1.0, max_abs))
      throw no_steady_state(
          "steady state requested but the drift spectrum has a mode with "
          "non-positive decay rate");
    const int n = ions();
    Eigen::MatrixXcd w(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        w(a, b) = (d_(a, b) == 0.0) ? 0.0 : d_(a, b) / s_(a, b);
    const Eigen::MatrixXcd uw = u_ * w;
    MomentProfile prof;
    prof.xx.resize(n);
    prof.pp.resize(n);
    double max_imag = 0;
    for (int mu = 0; mu < m; ++mu) {
      std::complex<double> q2 = 0;
      for (int b = 0; b < m; ++b) q2 += uw(mu, b) * u_(mu, b);
      max_imag = std::max(max_imag, std::abs(q2.imag()));
      (mu < n ? prof.xx[mu] : prof.pp[mu - n]) = q2.real() * alpha_ * alpha_;
    }
    check_imag(max_imag, prof);
    return prof;
  }

 private:
  static std::complex<double> f_stable(std::complex<double> s,
                                       std::complex<double> gg, double t) {
    const std::complex<double> z = s * t;
    if (std::abs(z) < 1e-4) {
      // (1 - e^{-z})/s = t (1 - z/2 + z^2/6 - z^3/24 + ...)
      return t * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
    }
    return (1.0 - gg) / s;
  }

  void check_imag(double max_imag, const MomentProfile& prof) const {
    double scale = 1e-30;
    for (double v : prof.xx) scale = std::max(scale, std::abs(v));
    for (double v : prof.pp) scale = std::max(scale, std::abs(v));
    scale /= (alpha_ * alpha_);
    if (max_imag > 1e-6 * scale)
      throw numerical_inconsistency(
          "moment propagation: imaginary residue " + std::to_string(max_imag) +
          " exceeds tolerance relative to scale " + std::to_string(scale));
  }

  void fill_kernel(double t, Eigen::MatrixXcd& z) const {
    const int m = static_cast<int>(lambda_.size());
    if (t < 0) throw invalid_input("moment propagation: negative time");
    Eigen::VectorXcd g(m);
    for (int a = 0; a < m; ++a) g[a] = std::exp(-lambda_[a] * t);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        z(a, b) = g[a] * g[b] * p_(a, b) + f_stable(s_(a, b), g[a] * g[b], t) * d_(a, b);
  }

  Eigen::MatrixXcd u_;
  Eigen::VectorXcd lambda_;
  Eigen::MatrixXcd p_, d_, s_;
  double alpha_ = 1;
};

// ---------------------------------------------------------------------------
// Convenience entry points.
// ---------------------------------------------------------------------------

struct TimeSeries {
  std::vector<double> times;
  std::vector<int> ions;   // 0-based tracked ions
  Eigen::MatrixXd xx;      // times x ions, d0^2 units
};

inline TimeSeries evolve_second_moments(const DriftSpectrum& spec,
                                        const std::vector<double>& theta,
                                        const MomentProfile& init,
                                        const std::vector<double>& times,
                                        const std::vector<int>& ions,
                                        double alpha = 1.0) {
  SecondMomentKernel kernel(spec, theta, init, alpha);
  TimeSeries series;
  series.times = times;
  series.ions = ions;
  series.xx = kernel.xx_series(times, ions);
  return series;
}

inline MomentProfile steady_state(const DriftSpectrum& spec,
                                  const std::vector<double>& theta,
                                  double alpha = 1.0) {
  const int n = spec.ions();
  MomentProfile zero;
  zero.xx.assign(n, 0.0);
  zero.pp.assign(n, 0.0);
  SecondMomentKernel kernel(spec, theta, zero, alpha);
  return kernel.steady_profile();
}

// Independent stationarity cross-check: solve the covariance balance
// Omega S + S Omega^T = diag(0, 2 gamma_i Theta_i) directly and read the
// diagonal.  Shares no code path with the eigenbasis propagation.
inline MomentProfile steady_state_lyapunov(const ModeMatrix& m,
                                           const std::vector<double>& gamma,
                                           const std::vector<double>& theta,
                                           double alpha = 1.0) {
  const int n = m.size();
  if (static_cast<int>(theta.size()) != n)
    throw invalid_input("lyapunov steady state: theta size mismatch");
  const Eigen::MatrixXd omega = build_drift_matrix(m, gamma);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) q(n + i, n + i) = 2.0 * gamma[i] * theta[i];

  const Eigen::MatrixXd cov = solve_continuous_lyapunov(-omega, q);
  const double res = lyapunov_residual(-omega, q, cov);
  if (res > 1e-8)
    throw numerical_inconsistency(
        "lyapunov steady state: residual " + std::to_string(res));

  MomentProfile prof;
  prof.xx.resize(n);
  prof.pp.resize(n);
  for (int i = 0; i < n; ++i) {
    prof.xx[i] = cov(i, i) * alpha * alpha;
    prof.pp[i] = cov(n + i, n + i) * alpha * alpha;
  }
  return prof;
}

// ---------------------------------------------------------------------------
// Worst-case background profile.  For fixed kappa = gamma_bg * t_bg the
// steady profile grows monotonically with t_bg but saturates: raising t_bg
// weakens gamma_bg in proportion.  The bound is the large-t_bg limit,
// approximated by doubling t_bg until every displacement moves by less than
// rel_tol.
// ---------------------------------------------------------------------------

struct UpperBoundResult {
  MomentProfile profile;
  double t_bg_reached = 0;
  int doublings = 0;
};

struct UpperBoundOptions {
  double t_bg_start = 0;      // 0: pick from the mode spectrum
  double rel_tol = 1e-3;
  int max_doublings = 10;
};

inline UpperBoundResult upper_bound_profile(const ModeMatrix& m,
                                            const NormalModes& modes,
                                            const CoolingConfig& config,
                                            double kappa, double alpha,
                                            const UpperBoundOptions& opts = {}) {
  const int n = m.size();
  auto steady_at = [&](double t_bg) {
    const BathAssignment baths = assign_baths(config, n, kappa, t_bg);
    const std::vector<double> theta = noise_strengths(modes, baths);
    const DriftSpectrum spec = spectral_decomposition(m, baths.gamma);
    return steady_state(spec, theta, alpha);
  };

  UpperBoundResult result;
  if (kappa == 0) {
    // No background at all; the bound is the cooled-chain profile itself.
    result.profile = steady_at(1.0);
    result.t_bg_reached = 0;
    return result;
  }

  const double w_max = modes.omega.maxCoeff();
  double t_bg = opts.t_bg_start > 0
                    ? opts.t_bg_start
                    : std::max({50.0 * w_max, 10.0 * config.t_cool, 100.0});
  MomentProfile prev = steady_at(t_bg);
  double worst = 0;
  for (int k = 0; k < opts.max_doublings; ++k) {
    t_bg *= 2;
    MomentProfile next = steady_at(t_bg);
    worst = 0;
    for (int i = 0; i < n; ++i) {
      const double a = std::sqrt(prev.xx[i]);
      const double b = std::sqrt(next.xx[i]);
      worst = std::max(worst, std::abs(b - a) / std::max(b, 1e-300));
    }
    prev = std::move(next);
    if (worst < opts.rel_tol) {
      result.profile = std::move(prev);
      result.t_bg_reached = t_bg;
      result.doublings = k + 1;
      return result;
    }
  }
  // A profile that keeps growing doubling after doubling means some mode is
  // effectively decoupled from every cooled ion, so its level scales with
  // t_bg and no finite bound exists.
  throw convergence_failure(
      "upper bound profile did not saturate while doubling t_bg (some motion "
      "is not reached by any cooled ion)",
      worst);
}

}  // namespace coolchain
