#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coolchain/errors.hpp"

namespace coolchain {

// ---------------------------------------------------------------------------
// Axial trap potentials, in simulation units (lengths in d0, frequencies in
// omega0).  A harmonic trap is V(z) = omega_z^2 z^2 / 2; the quartic trap
// V(z) = alpha2 z^2 / 2 + alpha4 z^4 / 4 flattens the chain centre when
// alpha2 < 0 < alpha4.  A "uniform" trap prescribes exactly equal spacings
// and represents the idealized limit of a translationally invariant chain;
// its axial restoring force is characterised by the per-ion curvature beta
// chosen so the lowest axial mode sits at axial_omega.
// ---------------------------------------------------------------------------

struct HarmonicTrap {
  double omega_z = 0;
};

struct QuarticTrap {
  double alpha2 = 0;
  double alpha4 = 0;
};

struct UniformTrap {
  double spacing = 1.0;
  double axial_omega = 0;  // lowest axial mode frequency to reproduce
};

using TrapPotential = std::variant<HarmonicTrap, QuarticTrap, UniformTrap>;

inline double trap_force_gradient(const TrapPotential& trap, double z) {
  // dV/dz at a single site.  The uniform trap has no analytic force; its
  // equilibrium is prescribed directly, so this is never called for it.
  if (const auto* h = std::get_if<HarmonicTrap>(&trap))
    return h->omega_z * h->omega_z * z;
  if (const auto* q = std::get_if<QuarticTrap>(&trap))
    return q->alpha2 * z + q->alpha4 * z * z * z;
  throw invalid_input("uniform trap has no potential gradient");
}

inline double trap_curvature(const TrapPotential& trap, double z) {
  if (const auto* h = std::get_if<HarmonicTrap>(&trap))
    return h->omega_z * h->omega_z;
  if (const auto* q = std::get_if<QuarticTrap>(&trap))
    return q->alpha2 + 3.0 * q->alpha4 * z * z;
  return std::get<UniformTrap>(trap).axial_omega *
         std::get<UniformTrap>(trap).axial_omega;
}

// ---------------------------------------------------------------------------
// Equilibrium configuration of N ions on the trap axis.
// ---------------------------------------------------------------------------

struct ChainEquilibrium {
  TrapPotential trap;
  std::vector<double> positions;         // ascending, sim units
  std::vector<double> axial_curvatures;  // d^2 V/dz^2 at each ion
  int newton_iterations = 0;
  double gradient_norm = 0;              // max-norm of the force residual

  int size() const { return static_cast<int>(positions.size()); }
};

struct EquilibriumOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-12;
  std::vector<double> initial;  // warm-start positions; empty picks a guess
};

namespace detail {

// Potential energy of the chain: trap terms plus pairwise Coulomb 1/r.
inline double chain_energy(const TrapPotential& trap,
                           const Eigen::VectorXd& z) {
  const int n = static_cast<int>(z.size());
  double e = 0;
  for (int i = 0; i < n; ++i) {
    if (const auto* h = std::get_if<HarmonicTrap>(&trap))
      e += 0.5 * h->omega_z * h->omega_z * z[i] * z[i];
    else if (const auto* q = std::get_if<QuarticTrap>(&trap))
      e += 0.5 * q->alpha2 * z[i] * z[i] +
           0.25 * q->alpha4 * z[i] * z[i] * z[i] * z[i];
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r = z[j] - z[i];
      if (r <= 0) return std::numeric_limits<double>::infinity();
      e += 1.0 / r;
    }
  return e;
}

inline Eigen::VectorXd chain_gradient(const TrapPotential& trap,
                                      const Eigen::VectorXd& z) {
  const int n = static_cast<int>(z.size());
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = trap_force_gradient(trap, z[i]);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r = z[j] - z[i];
      const double f = 1.0 / (r * r);
      g[i] += f;   // ion i pushed towards -z by its right neighbours
      g[j] -= f;
    }
  return g;
}

// Hessian of the chain energy.  This is identical to the axial mode matrix:
// off-diagonal -2/r^3, diagonal V'' + sum_j 2/r^3.
inline Eigen::MatrixXd chain_hessian(const TrapPotential& trap,
                                     const Eigen::VectorXd& z) {
  const int n = static_cast<int>(z.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = trap_curvature(trap, z[i]);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r = z[j] - z[i];
      const double c = 2.0 / (r * r * r);
      h(i, j) -= c;
      h(j, i) -= c;
      h(i, i) += c;
      h(j, j) += c;
    }
  return h;
}

// Initial guess: uniform placement over an extent where the trap force on the
// outermost ion roughly balances the Coulomb pressure of the rest.
inline Eigen::VectorXd initial_positions(const TrapPotential& trap, int n) {
  double half = 0.5 * (n - 1);
  if (n == 1) return Eigen::VectorXd::Zero(1);
  auto edge_balance = [&](double zmax) {
    return trap_force_gradient(trap, zmax) - n / (zmax * zmax);
  };
  double lo = 1e-3, hi = 1e3;
  // The balance function is negative near 0 (Coulomb wins) and positive for
  // large extents in any confining trap; bisect a handful of times.
  while (edge_balance(hi) < 0 && hi < 1e9) hi *= 10;
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (edge_balance(mid) < 0 ? lo : hi) = mid;
  }
  const double zmax = 0.5 * (lo + hi);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = (i - half) / half * zmax;
  return z;
}

}  // namespace detail

// Finds the classical equilibrium positions by damped Newton iteration on the
// total potential energy, with a Levenberg shift when the Hessian is not
// positive definite (the quartic double well makes that a real possibility
// far from the solution) and backtracking on the energy.
inline ChainEquilibrium solve_equilibrium(const TrapPotential& trap, int n,
                                          const EquilibriumOptions& opts = {}) {
  if (n < 1) throw invalid_input("chain needs at least one ion");
  if (const auto* h = std::get_if<HarmonicTrap>(&trap)) {
    if (h->omega_z <= 0) throw invalid_input("harmonic trap needs omega_z > 0");
  }
  if (const auto* q = std::get_if<QuarticTrap>(&trap)) {
    if (q->alpha4 < 0) throw invalid_input("quartic trap needs alpha4 >= 0");
    if (q->alpha4 == 0 && q->alpha2 <= 0)
      throw invalid_input("quartic trap with alpha4 = 0 needs alpha2 > 0");
  }

  ChainEquilibrium eq;
  eq.trap = trap;

  if (const auto* u = std::get_if<UniformTrap>(&trap)) {
    if (u->spacing <= 0) throw invalid_input("uniform trap needs spacing > 0");
    if (u->axial_omega <= 0)
      throw invalid_input("uniform trap needs axial_omega > 0");
    eq.positions.resize(n);
    for (int i = 0; i < n; ++i)
      eq.positions[i] = (i - 0.5 * (n - 1)) * u->spacing;
    eq.axial_curvatures.assign(n, u->axial_omega * u->axial_omega);
    return eq;
  }

  Eigen::VectorXd z;
  if (opts.initial.empty()) {
    z = detail::initial_positions(trap, n);
  } else {
    if (static_cast<int>(opts.initial.size()) != n)
      throw invalid_input("equilibrium warm start has wrong size");
    z = Eigen::Map<const Eigen::VectorXd>(opts.initial.data(), n);
  }
  double energy = detail::chain_energy(trap, z);
  double grad_norm = 0;
  int iter = 0;
  bool converged = false;
  for (; iter < opts.max_iterations; ++iter) {
    Eigen::VectorXd g = detail::chain_gradient(trap, z);
    grad_norm = g.lpNorm<Eigen::Infinity>();

    Eigen::MatrixXd h = detail::chain_hessian(trap, z);
    const double diag_scale = h.diagonal().cwiseAbs().maxCoeff();
    // Each gradient component sums O(n) pair forces of size up to the local
    // curvature scale; residuals below that sum's rounding noise carry no
    // information, so treat them as converged.
    const double gradient_noise = 256.0 *
                                  std::numeric_limits<double>::epsilon() *
                                  diag_scale * std::sqrt(double(n));
    if (grad_norm <= std::max(opts.gradient_tolerance, gradient_noise)) {
      converged = true;
      break;
    }
    double mu = 0;
    Eigen::VectorXd step;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd shifted = h;
      shifted.diagonal().array() += mu;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
      if (ldlt.info() == Eigen::Success) {
        step = ldlt.solve(-g);
        if (step.allFinite() && g.dot(step) < 0) break;
      }
      mu = (mu == 0) ? 1e-8 * diag_scale : 10 * mu;
      step.resize(0);
    }
    if (step.size() == 0)
      throw convergence_failure("equilibrium solver: no descent direction",
                                grad_norm);

    // Backtrack on the energy.  Once the promised decrease |slope| drops
    // below the rounding floor of the energy sum, Armijo comparisons are
    // noise; only then fall back to accepting on gradient reduction so
    // Newton can finish quadratically instead of stalling.
    const double slope = g.dot(step);
    const double energy_floor = 1024.0 *
                                std::numeric_limits<double>::epsilon() *
                                (std::abs(energy) + 1.0);
    const bool polish = std::abs(slope) <= energy_floor;
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd trial = z + t * step;
      const double e_trial = detail::chain_energy(trap, trial);
      const bool energy_ok = e_trial <= energy + 1e-4 * t * slope;
      const bool gradient_ok =
          polish &&
          detail::chain_gradient(trap, trial).lpNorm<Eigen::Infinity>() <=
              0.9 * grad_norm;
      if (energy_ok || gradient_ok) {
        z = trial;
        energy = e_trial;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted)
      throw convergence_failure("equilibrium solver: line search stalled",
                                grad_norm);
  }
  if (!converged) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", grad_norm);
    throw convergence_failure(
        "equilibrium solver: gradient " + std::string(buf) +
            " above tolerance after " + std::to_string(iter) + " iterations",
        grad_norm);
  }

  std::sort(z.begin(), z.end());
  // Both supported analytic traps are even in z, so the solution must be
  // reflection symmetric; average out the last-bit asymmetry of the solver.
  for (int i = 0, j = n - 1; i < j; ++i, --j) {
    const double s = 0.5 * (z[j] - z[i]);
    z[i] = -s;
    z[j] = s;
  }
  if (n % 2 == 1) z[n / 2] = 0;

  for (int i = 0; i + 1 < n; ++i)
    if (!(z[i + 1] - z[i] > 0))
      throw numerical_inconsistency("equilibrium positions not distinct");

  eq.positions.assign(z.begin(), z.end());
  eq.axial_curvatures.resize(n);
  for (int i = 0; i < n; ++i)
    eq.axial_curvatures[i] = trap_curvature(trap, z[i]);
  eq.newton_iterations = iter;
  eq.gradient_norm = grad_norm;
  return eq;
}

// ---------------------------------------------------------------------------
// Spacing conventions.  The characteristic spacing of an inhomogeneous chain
// is a convention; both common choices are supported, plus the trivial exact
// one for uniform chains.
// ---------------------------------------------------------------------------

enum class SpacingConvention {
  MinimumSpacing,   // smallest gap, which sits at the chain centre
  WindowedMean,     // mean gap excluding a few ions at each edge
  Exact,            // uniform trap only
};

struct SpacingRule {
  SpacingConvention convention = SpacingConvention::MinimumSpacing;
  int exclude_per_edge = 0;  // gaps dropped at each end for WindowedMean
};

inline std::vector<double> chain_spacings(const ChainEquilibrium& eq) {
  std::vector<double> s;
  for (int i = 0; i + 1 < eq.size(); ++i)
    s.push_back(eq.positions[i + 1] - eq.positions[i]);
  return s;
}

// Characteristic spacing of the equilibrium, in current simulation length
// units.  Callers converting between unit systems multiply the physical d0
// they assumed by this value to get the d0 the convention actually implies.
inline double compute_d0(const ChainEquilibrium& eq,
                         const SpacingRule& rule = {}) {
  if (eq.size() < 2)
    throw invalid_input("spacing undefined for a single ion");
  const std::vector<double> s = chain_spacings(eq);
  switch (rule.convention) {
    case SpacingConvention::MinimumSpacing:
      return *std::min_element(s.begin(), s.end());
    case SpacingConvention::WindowedMean: {
      const int e = rule.exclude_per_edge;
      if (e < 0 || 2 * e >= static_cast<int>(s.size()))
        throw invalid_input("spacing window excludes every gap");
      double sum = 0;
      for (int i = e; i < static_cast<int>(s.size()) - e; ++i) sum += s[i];
      return sum / (static_cast<int>(s.size()) - 2 * e);
    }
    case SpacingConvention::Exact: {
      const auto* u = std::get_if<UniformTrap>(&eq.trap);
      if (!u)
        throw invalid_input("exact spacing only defined for a uniform trap");
      return u->spacing;
    }
  }
  throw invalid_input("unknown spacing convention");
}

// ---------------------------------------------------------------------------
// Quartic trap fit: choose (alpha2, alpha4) so that the windowed mean spacing
// equals the target and the windowed spacing variance is minimal (the chain
// centre as uniform as a quartic trap can make it).
// ---------------------------------------------------------------------------

struct QuarticFitResult {
  QuarticTrap trap;
  ChainEquilibrium equilibrium;     // already rescaled to the target spacing
  double mean_spacing = 0;          // windowed, equals the target
  double residual_rms = 0;          // rms of (spacing - target)/target in window
  int evaluations = 0;              // equilibrium solves spent
};

struct QuarticFitOptions {
  int scan_points = 41;            // coarse scan of the shape parameter
  double shape_range = 100.0;      // |alpha2| bound in the alpha4 = 1 gauge
  double shape_tolerance = 1e-4;   // asinh-space width, golden-section stop
  int max_refine_iterations = 80;
};

namespace detail {

struct ShapeObjective {
  int n;
  int exclude;
  mutable int evaluations = 0;
  mutable double last_v = 0;
  mutable std::vector<double> last_positions;

  // Windowed relative spacing variance of the equilibrium for the canonical
  // shape alpha4 = 1, alpha2 = v.  Rescaling z -> s z maps (alpha2, alpha4)
  // to (alpha2 s^3, alpha4 s^5), so v runs over every quartic shape exactly
  // once: v << 0 is a deep double well, v = 0 a pure quartic, v >> 0 nearly
  // harmonic.
  double operator()(double v, ChainEquilibrium* out = nullptr) const {
    ++evaluations;
    EquilibriumOptions opts;
    opts.max_iterations = 400;
    // Deep double wells start the cold solver on the central hill; warm
    // starting from a nearby shape keeps Newton inside the basin.
    if (!last_positions.empty() &&
        std::abs(std::asinh(v) - std::asinh(last_v)) < 1.0)
      opts.initial = last_positions;
    ChainEquilibrium eq = solve_equilibrium(QuarticTrap{v, 1.0}, n, opts);
    last_v = v;
    last_positions = eq.positions;
    const std::vector<double> s = chain_spacings(eq);
    const int m = static_cast<int>(s.size());
    if (2 * exclude >= m) throw invalid_input("fit window excludes every gap");
    double mean = 0;
    for (int i = exclude; i < m - exclude; ++i) mean += s[i];
    mean /= (m - 2 * exclude);
    double var = 0;
    for (int i = exclude; i < m - exclude; ++i) {
      const double d = s[i] / mean - 1.0;
      var += d * d;
    }
    if (out) *out = std::move(eq);
    return var / (m - 2 * exclude);
  }
};

}  // namespace detail

inline QuarticFitResult fit_quartic(int n, double target_spacing,
                                    int exclude_per_edge,
                                    const QuarticFitOptions& opts = {}) {
  if (n < 4) throw invalid_input("quartic fit needs at least four ions");
  if (target_spacing <= 0)
    throw invalid_input("quartic fit needs a positive target spacing");

  detail::ShapeObjective objective{n, exclude_per_edge};

  // Coarse scan uniform in asinh(v) (log-like density on both branches,
  // smooth through the pure quartic at v = 0), then golden-section
  // refinement of the best interior bracket in the same coordinate.
  std::vector<double> us(opts.scan_points), fs(opts.scan_points);
  const double u_hi = std::asinh(opts.shape_range);
  int best = -1;
  for (int i = 0; i < opts.scan_points; ++i) {
    us[i] = u_hi * (2.0 * i / (opts.scan_points - 1) - 1.0);
    fs[i] = objective(std::sinh(us[i]));
    if (best < 0 || fs[i] < fs[best]) best = i;
  }
  if (best == 0 || best == opts.scan_points - 1)
    throw convergence_failure(
        "quartic fit: flatness optimum outside the shape scan range",
        fs[best]);

  double a = us[best - 1], b = us[best + 1];
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = objective(std::sinh(c)), fd = objective(std::sinh(d));
  for (int it = 0; it < opts.max_refine_iterations &&
                   (b - a) > opts.shape_tolerance;
       ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = objective(std::sinh(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = objective(std::sinh(d));
    }
  }
  const double v = std::sinh((fc < fd) ? c : d);

  ChainEquilibrium shape_eq;
  const double var = objective(v, &shape_eq);

  // Rescale the unit-shape solution so the windowed mean spacing hits the
  // target exactly.
  const std::vector<double> s = chain_spacings(shape_eq);
  double mean = 0;
  for (int i = exclude_per_edge;
       i < static_cast<int>(s.size()) - exclude_per_edge; ++i)
    mean += s[i];
  mean /= (static_cast<int>(s.size()) - 2 * exclude_per_edge);
  const double scale = target_spacing / mean;

  QuarticFitResult result;
  result.trap = QuarticTrap{v / (scale * scale * scale),
                            1.0 / std::pow(scale, 5)};
  result.equilibrium = solve_equilibrium(result.trap, n);
  result.mean_spacing =
      compute_d0(result.equilibrium,
                 {SpacingConvention::WindowedMean, exclude_per_edge});
  result.residual_rms = std::sqrt(var);
  result.evaluations = objective.evaluations;
  return result;
}

// Per-ion curvature for the uniform trap convention: a constant beta chosen
// so the lowest axial mode frequency equals omega_ref.  The pure-Coulomb part
// of the axial matrix has exact zero row sums (uniform translation costs no
// Coulomb energy), so its lowest eigenvalue is zero and beta = omega_ref^2.
inline std::vector<double> uniform_trap_curvatures(int n, double omega_ref) {
  if (omega_ref <= 0)
    throw invalid_input("uniform trap curvature needs omega_ref > 0");
  return std::vector<double>(n, omega_ref * omega_ref);
}

}  // namespace coolchain
