#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "coolchain/dynamics.hpp"
#include "coolchain/errors.hpp"
#include "coolchain/modes.hpp"

namespace coolchain {

// ---------------------------------------------------------------------------
// Deterministic random numbers.  std::normal_distribution is implementation
// defined, which would make "same seed, same trajectory" break across
// standard libraries; instead: splitmix64 expands the seed into xoshiro256++
// states (one independent stream per trajectory) and Box-Muller turns the
// uniform output into Gaussians.
// ---------------------------------------------------------------------------

namespace rng {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class GaussianStream {
 public:
  explicit GaussianStream(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  uint64_t next() {  // xoshiro256++
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Strictly inside (0, 1) so log() above is always finite.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  uint64_t s_[4];
  double spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace rng

// ---------------------------------------------------------------------------
// Classical Langevin ensemble.  Integrates
//
//   dx_i = p_i dt
//   dp_i = (-sum_j A_ij x_j - gamma_i p_i) dt + sqrt(2 gamma_i Theta_i) dW_i
//
// with the BAOAB splitting: velocity-Verlet half-kicks around an exact
// Ornstein-Uhlenbeck update of the momentum, so the friction-noise balance
// is exact at any step size and the leading error is the O(dt^2) Verlet one.
// This deliberately never touches the drift-spectrum machinery: it is the
// independent check on the closed-form moments.
// ---------------------------------------------------------------------------

struct LangevinConfig {
  double dt = 0;
  double t_end = 0;            // total integration time per trajectory
  double t_burn = 0;           // discard before sampling
  double sample_interval = 0;  // 0: every step
  int n_traj = 0;
  uint64_t seed = 1;
};

struct EnsembleMoments {
  std::vector<double> xx, pp;        // d0^2 units, like the closed forms
  std::vector<double> xx_se, pp_se;  // standard errors across trajectories
  double dissipation = 0;            // time-averaged sum_i gamma_i <p_i^2>
  double injection = 0;              // sum_i gamma_i Theta_i
  double dissipation_se = 0;
  int n_traj = 0;
  long samples_per_traj = 0;
};

inline EnsembleMoments run_langevin_ensemble(const ModeMatrix& m,
                                             const std::vector<double>& gamma,
                                             const std::vector<double>& theta,
                                             const LangevinConfig& config,
                                             double alpha = 1.0) {
  const int n = m.size();
  if (static_cast<int>(gamma.size()) != n ||
      static_cast<int>(theta.size()) != n)
    throw invalid_input("langevin ensemble: size mismatch");
  if (config.dt <= 0) throw invalid_input("langevin ensemble: dt must be > 0");
  if (config.t_end <= config.t_burn)
    throw invalid_input("langevin ensemble: t_end must exceed t_burn");
  if (config.n_traj < 2)
    throw invalid_input("langevin ensemble: need at least two trajectories");

  const Eigen::MatrixXd& a = m.entries;
  const long n_steps = std::lround(config.t_end / config.dt);
  const long burn_steps = std::lround(config.t_burn / config.dt);
  const long stride =
      config.sample_interval > 0
          ? std::max(1l, std::lround(config.sample_interval / config.dt))
          : 1;

  // Exact OU coefficients per ion.
  Eigen::VectorXd ou_decay(n), ou_kick(n);
  for (int i = 0; i < n; ++i) {
    if (gamma[i] < 0) throw invalid_input("langevin ensemble: gamma < 0");
    if (theta[i] < 0) throw invalid_input("langevin ensemble: theta < 0");
    const double c = std::exp(-gamma[i] * config.dt);
    ou_decay[i] = c;
    ou_kick[i] = std::sqrt((1.0 - c * c) * theta[i]);
  }

  // Per-trajectory time averages; their spread gives honest standard errors
  // even though samples within one trajectory are correlated.
  Eigen::MatrixXd traj_xx(config.n_traj, n), traj_pp(config.n_traj, n);
  Eigen::VectorXd traj_diss(config.n_traj);

  uint64_t seed_state = config.seed;
  long samples = 0;
  for (int tr = 0; tr < config.n_traj; ++tr) {
    rng::GaussianStream stream(rng::splitmix64(seed_state));

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd force = -(a * x);
    Eigen::VectorXd acc_xx = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd acc_pp = Eigen::VectorXd::Zero(n);
    samples = 0;

    for (long step = 0; step < n_steps; ++step) {
      p += 0.5 * config.dt * force;
      x += 0.5 * config.dt * p;
      for (int i = 0; i < n; ++i)
        p[i] = ou_decay[i] * p[i] + ou_kick[i] * stream.normal();
      x += 0.5 * config.dt * p;
      force = -(a * x);
      p += 0.5 * config.dt * force;

      if (step >= burn_steps && (step - burn_steps) % stride == 0) {
        acc_xx += x.cwiseProduct(x);
        acc_pp += p.cwiseProduct(p);
        ++samples;
      }
    }
    if (samples == 0)
      throw invalid_input("langevin ensemble: no samples after burn-in");
    traj_xx.row(tr) = acc_xx / samples;
    traj_pp.row(tr) = acc_pp / samples;
    double diss = 0;
    for (int i = 0; i < n; ++i) diss += gamma[i] * traj_pp(tr, i);
    traj_diss[tr] = diss;
  }

  EnsembleMoments out;
  out.n_traj = config.n_traj;
  out.samples_per_traj = samples;
  out.xx.resize(n);
  out.pp.resize(n);
  out.xx_se.resize(n);
  out.pp_se.resize(n);
  const double a2 = alpha * alpha;
  const double norm = std::sqrt(static_cast<double>(config.n_traj));
  for (int i = 0; i < n; ++i) {
    const double mx = traj_xx.col(i).mean();
    const double mp = traj_pp.col(i).mean();
    const double sx = std::sqrt(
        (traj_xx.col(i).array() - mx).square().sum() / (config.n_traj - 1));
    const double sp = std::sqrt(
        (traj_pp.col(i).array() - mp).square().sum() / (config.n_traj - 1));
    out.xx[i] = mx * a2;
    out.pp[i] = mp * a2;
    out.xx_se[i] = sx / norm * a2;
    out.pp_se[i] = sp / norm * a2;
  }
  const double md = traj_diss.mean();
  out.dissipation = md * a2;
  out.dissipation_se =
      std::sqrt((traj_diss.array() - md).square().sum() /
                (config.n_traj - 1)) /
      norm * a2;
  double inj = 0;
  for (int i = 0; i < n; ++i) inj += gamma[i] * theta[i];
  out.injection = inj * a2;
  return out;
}

// ---------------------------------------------------------------------------
// Comparison against the closed-form profile, in standard-error units.
// ---------------------------------------------------------------------------

struct OracleComparison {
  std::vector<double> z_xx, z_pp;
  double max_abs_z = 0;
  double energy_balance_z = 0;
  double z_threshold = 0;
  bool pass = false;
};

inline OracleComparison compare_with_closed_form(const EnsembleMoments& mc,
                                                 const MomentProfile& expected,
                                                 double z_threshold = 4.0) {
  const int n = static_cast<int>(mc.xx.size());
  if (expected.size() != n)
    throw invalid_input("oracle comparison: size mismatch");
  OracleComparison cmp;
  cmp.z_threshold = z_threshold;
  cmp.z_xx.resize(n);
  cmp.z_pp.resize(n);
  for (int i = 0; i < n; ++i) {
    cmp.z_xx[i] = (mc.xx[i] - expected.xx[i]) / mc.xx_se[i];
    cmp.z_pp[i] = (mc.pp[i] - expected.pp[i]) / mc.pp_se[i];
    cmp.max_abs_z = std::max({cmp.max_abs_z, std::abs(cmp.z_xx[i]),
                              std::abs(cmp.z_pp[i])});
  }
  cmp.energy_balance_z =
      (mc.dissipation - mc.injection) / mc.dissipation_se;
  cmp.pass = cmp.max_abs_z <= z_threshold &&
             std::abs(cmp.energy_balance_z) <= z_threshold;
  return cmp;
}

}  // namespace coolchain
