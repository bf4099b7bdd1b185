#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "coolchain/baths.hpp"
#include "coolchain/constants.hpp"
#include "coolchain/dynamics.hpp"
#include "coolchain/errors.hpp"
#include "coolchain/relaxation.hpp"
#include "coolchain/system.hpp"

namespace coolchain {

// ---------------------------------------------------------------------------
// Local phonon number of ion i in a transverse well at omega_x.  The full
// form uses both quadratures; the approximate one assumes equipartition,
// which holds to the extent the Coulomb coupling detunes the local well
// weakly.  Moments are in d0^2 units, hence the alpha^-2.
// ---------------------------------------------------------------------------

inline double local_phonon_number(double xx, double omega_x, double alpha) {
  if (omega_x <= 0) throw invalid_input("phonon number needs omega_x > 0");
  if (alpha <= 0) throw invalid_input("phonon number needs alpha > 0");
  return xx * omega_x / (alpha * alpha) - 0.5;
}

inline double local_phonon_number(double xx, double pp, double omega_x,
                                  double alpha) {
  if (omega_x <= 0) throw invalid_input("phonon number needs omega_x > 0");
  if (alpha <= 0) throw invalid_input("phonon number needs alpha > 0");
  return 0.5 * (omega_x * xx + pp / omega_x) / (alpha * alpha) - 0.5;
}

// ---------------------------------------------------------------------------
// Two-qubit gate infidelity floors from thermal position spread.
// Transverse: the differential kick picks up phase noise through the
// Lamb-Dicke-like factor eta = |dk| delta_x, contributing ~ pi^2 eta^4 / 4.
// Axial: beam pointing across a Gaussian waist w gives ~ pi^2 (dz/w)^4 / 2.
// Arguments in matching length units (d0 works: dk in 1/d0, w in d0).
// ---------------------------------------------------------------------------

inline double gate_infidelity_transverse(double delta_x, double dk) {
  if (delta_x < 0 || dk < 0)
    throw invalid_input("transverse infidelity needs non-negative inputs");
  const double eta = dk * delta_x;
  const double eta2 = eta * eta;
  return constants::pi * constants::pi * eta2 * eta2 / 4.0;
}

inline double gate_infidelity_axial(double delta_z, double waist) {
  if (delta_z < 0) throw invalid_input("axial infidelity needs delta_z >= 0");
  if (waist <= 0) throw invalid_input("axial infidelity needs waist > 0");
  const double r = delta_z / waist;
  const double r2 = r * r;
  return constants::pi * constants::pi * r2 * r2 / 2.0;
}

// ---------------------------------------------------------------------------
// Cooling efficiency of a sparse-cooling steady state against the uniformly
// cooled ideal.  Two complementary figures over the heated set H:
//   max_normalized  - worst heated displacement over the ideal chain-centre
//                     displacement (how far the hottest ion is from perfect),
//   mean_ratio      - average of delta_i / delta_i^ideal (how much the bulk
//                     is degraded), with worst_ratio / worst_ion the extreme.
// An empty heated set (everything cooled) scores exactly 1 by convention.
// ---------------------------------------------------------------------------

struct EfficiencyReport {
  double max_normalized = 1.0;
  double mean_ratio = 1.0;
  double worst_ratio = 1.0;
  int worst_ion = -1;  // 0-based; -1 when the heated set is empty
};

inline int middle_ion(int n) { return (n - 1) / 2; }  // lower middle if even

inline EfficiencyReport cooling_efficiency(const MomentProfile& achieved,
                                           const MomentProfile& ideal,
                                           const std::vector<int>& heated) {
  const int n = achieved.size();
  if (ideal.size() != n)
    throw invalid_input("cooling efficiency: profile size mismatch");
  EfficiencyReport rep;
  if (heated.empty()) return rep;

  const double ideal_mid = ideal.delta_x(middle_ion(n));
  if (!(ideal_mid > 0))
    throw invalid_input("cooling efficiency: ideal middle displacement is 0");

  double max_norm = 0, sum_ratio = 0, worst = 0;
  int worst_ion = -1;
  for (int i : heated) {
    if (i < 0 || i >= n)
      throw invalid_input("cooling efficiency: heated index out of range");
    const double d = achieved.delta_x(i);
    const double d0i = ideal.delta_x(i);
    if (!(d0i > 0))
      throw invalid_input("cooling efficiency: ideal displacement is 0");
    max_norm = std::max(max_norm, d / ideal_mid);
    const double ratio = d / d0i;
    sum_ratio += ratio;
    if (ratio > worst) {
      worst = ratio;
      worst_ion = i;
    }
  }
  rep.max_normalized = max_norm;
  rep.mean_ratio = sum_ratio / static_cast<double>(heated.size());
  rep.worst_ratio = worst;
  rep.worst_ion = worst_ion;
  return rep;
}

// ---------------------------------------------------------------------------
// Scenario assembly: cooling layout + background on top of a chain system.
// t_bg = 0 requests the worst-case (large-t_bg saturated) background.
// ---------------------------------------------------------------------------

struct ScenarioSettings {
  CoolingConfig cooling;
  double kappa = 0;
  double t_bg = 0;
};

struct SteadyScenario {
  BathAssignment baths;
  std::vector<double> theta;
  MomentProfile profile;        // steady state, d0^2 units
  double t_bg_used = 0;
};

inline SteadyScenario scenario_steady(const ChainSystem& sys, Direction dir,
                                      const ScenarioSettings& set) {
  const ModeMatrix& m = sys.matrix(dir);
  const NormalModes& modes = sys.modes(dir);
  SteadyScenario sc;
  if (set.kappa > 0 && set.t_bg == 0) {
    const UpperBoundResult bound = upper_bound_profile(
        m, modes, set.cooling, set.kappa, sys.units.alpha);
    sc.t_bg_used = bound.t_bg_reached;
    sc.baths = assign_baths(set.cooling, sys.size(), set.kappa, sc.t_bg_used);
    sc.theta = noise_strengths(modes, sc.baths);
    sc.profile = bound.profile;
    return sc;
  }
  sc.t_bg_used = set.t_bg;
  sc.baths = assign_baths(set.cooling, sys.size(), set.kappa, set.t_bg);
  sc.theta = noise_strengths(modes, sc.baths);
  const DriftSpectrum spec = spectral_decomposition(m, sc.baths.gamma);
  sc.profile = steady_state(spec, sc.theta, sys.units.alpha);
  return sc;
}

// Uniformly cooled reference at temperature t (usually the Doppler limit).
inline MomentProfile scenario_ideal(const ChainSystem& sys, Direction dir,
                                    double t) {
  return thermal_equilibrium_profile(sys.modes(dir), t, sys.units.alpha);
}

// ---------------------------------------------------------------------------
// Sweeps.  Each point carries per-direction efficiency reports; points that
// are impossible for a given chain (periods not dividing N-1) are kept in
// the output, marked skipped, rather than silently dropped.
// ---------------------------------------------------------------------------

struct SweepPoint {
  double value = 0;
  bool skipped = false;
  std::string note;
  bool has_axial = false, has_transverse = false;  // efficiency reports
  EfficiencyReport axial, transverse;
  // Relaxation sweeps fill these separately; tau can legitimately be 0.
  bool has_tau_axial = false, has_tau_transverse = false;
  double tau_axial = 0, tau_transverse = 0;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;
};

inline SweepResult sweep_gamma(const ChainSystem& sys,
                               const std::vector<Direction>& dirs,
                               const ScenarioSettings& base,
                               const std::vector<double>& gammas) {
  SweepResult result;
  result.axis = "gamma";
  for (double g : gammas) {
    SweepPoint pt;
    pt.value = g;
    ScenarioSettings set = base;
    set.cooling.gamma_cool = g;
    try {
      for (Direction d : dirs) {
        const SteadyScenario sc = scenario_steady(sys, d, set);
        const MomentProfile ideal = scenario_ideal(sys, d, set.cooling.t_cool);
        const EfficiencyReport rep =
            cooling_efficiency(sc.profile, ideal, sc.baths.heated);
        if (d == Direction::Axial) {
          pt.axial = rep;
          pt.has_axial = true;
        } else {
          pt.transverse = rep;
          pt.has_transverse = true;
        }
      }
    } catch (const convergence_failure& e) {
      pt.skipped = true;
      pt.note = e.what();
    } catch (const no_steady_state& e) {
      pt.skipped = true;
      pt.note = e.what();
    }
    result.points.push_back(std::move(pt));
  }
  return result;
}

// Relaxation time of one scenario: evolve from the uniform thermal state at
// t_init, tracking the steady-state-worst heated ion and the chain centre.
inline double scenario_relaxation_tau(const ChainSystem& sys, Direction d,
                                      const SteadyScenario& sc, double t_init,
                                      const RelaxationScanOptions& scan_opts) {
  const int n = sys.size();
  const DriftSpectrum spec =
      spectral_decomposition(sys.matrix(d), sc.baths.gamma);
  const MomentProfile init =
      thermal_equilibrium_profile(sys.modes(d), t_init, sys.units.alpha);
  SecondMomentKernel kernel(spec, sc.theta, init, sys.units.alpha);

  int worst = sc.baths.heated.empty() ? middle_ion(n) : sc.baths.heated.front();
  for (int i : sc.baths.heated)
    if (sc.profile.xx[i] > sc.profile.xx[worst]) worst = i;
  std::vector<int> tracked{worst};
  if (middle_ion(n) != worst) tracked.push_back(middle_ion(n));

  return relaxation_scan(kernel, sc.profile, tracked, scan_opts).tau;
}

struct PeriodSweepOptions {
  bool relaxation = false;
  RelaxationScanOptions scan;
  double t_init = 0;  // 0: start from t_cool
};

inline SweepResult sweep_period(const ChainSystem& sys,
                                const std::vector<Direction>& dirs,
                                const ScenarioSettings& base,
                                const std::vector<int>& periods,
                                const PeriodSweepOptions& opts = {}) {
  SweepResult result;
  result.axis = "period";
  const int n = sys.size();
  for (int p : periods) {
    SweepPoint pt;
    pt.value = p;
    if (p == 1) {
      // Every ion cooled: the sparse-cooling question degenerates and the
      // efficiency is exactly 1 by definition.
      for (Direction d : dirs) {
        if (d == Direction::Axial) pt.has_axial = true;
        else pt.has_transverse = true;
      }
      pt.note = "all ions cooled";
      result.points.push_back(std::move(pt));
      continue;
    }
    if (p < 1 || (n - 1) % p != 0) {
      pt.skipped = true;
      pt.note = "period does not divide N-1";
      result.points.push_back(std::move(pt));
      continue;
    }
    ScenarioSettings set = base;
    set.cooling.layout = PeriodicCooling{p};
    try {
      for (Direction d : dirs) {
        const SteadyScenario sc = scenario_steady(sys, d, set);
        const MomentProfile ideal = scenario_ideal(sys, d, set.cooling.t_cool);
        const EfficiencyReport rep =
            cooling_efficiency(sc.profile, ideal, sc.baths.heated);
        if (d == Direction::Axial) {
          pt.axial = rep;
          pt.has_axial = true;
        } else {
          pt.transverse = rep;
          pt.has_transverse = true;
        }
        if (opts.relaxation) {
          const double t_init =
              opts.t_init > 0 ? opts.t_init : set.cooling.t_cool;
          const double tau =
              scenario_relaxation_tau(sys, d, sc, t_init, opts.scan);
          (d == Direction::Axial ? pt.tau_axial : pt.tau_transverse) = tau;
          (d == Direction::Axial ? pt.has_tau_axial : pt.has_tau_transverse) =
              true;
        }
      }
    } catch (const convergence_failure& e) {
      pt.skipped = true;
      pt.note = e.what();
    } catch (const no_steady_state& e) {
      pt.skipped = true;
      pt.note = e.what();
    }
    result.points.push_back(std::move(pt));
  }
  return result;
}

// Cooling-segment-size sweep under edge cooling; the axis value is the
// heated count N_h = N - 2c, matching the usual way these curves are drawn.
inline SweepResult sweep_edge(const ChainSystem& sys,
                              const std::vector<Direction>& dirs,
                              const ScenarioSettings& base,
                              const std::vector<int>& cool_per_side) {
  SweepResult result;
  result.axis = "heated";
  const int n = sys.size();
  for (int c : cool_per_side) {
    SweepPoint pt;
    pt.value = n - 2 * c;
    if (c < 1 || 2 * c >= n) {
      pt.skipped = true;
      pt.note = "cooled segments do not fit the chain";
      result.points.push_back(std::move(pt));
      continue;
    }
    ScenarioSettings set = base;
    set.cooling.layout = EdgeCooling{c};
    try {
      for (Direction d : dirs) {
        const SteadyScenario sc = scenario_steady(sys, d, set);
        const MomentProfile ideal = scenario_ideal(sys, d, set.cooling.t_cool);
        const EfficiencyReport rep =
            cooling_efficiency(sc.profile, ideal, sc.baths.heated);
        if (d == Direction::Axial) {
          pt.axial = rep;
          pt.has_axial = true;
        } else {
          pt.transverse = rep;
          pt.has_transverse = true;
        }
      }
    } catch (const convergence_failure& e) {
      pt.skipped = true;
      pt.note = e.what();
    } catch (const no_steady_state& e) {
      pt.skipped = true;
      pt.note = e.what();
    }
    result.points.push_back(std::move(pt));
  }
  return result;
}

// Relaxation-time scaling with chain size.  The builder supplies a full
// system per N (quartic traps need refitting as the chain grows).  Starting
// point is the uniform thermal state at t_init (t_cool when left at 0);
// tracked ions are the steady-state-worst heated ion and the chain centre.
struct SizeSweepOptions {
  RelaxationScanOptions scan;
  std::vector<Direction> directions{Direction::Axial};
  double t_init = 0;
};

inline SweepResult sweep_size(
    const std::function<ChainSystem(int)>& builder,
    const std::vector<int>& sizes, const ScenarioSettings& base,
    const SizeSweepOptions& opts = {}) {
  SweepResult result;
  result.axis = "size";
  for (int n : sizes) {
    SweepPoint pt;
    pt.value = n;
    const ChainSystem sys = builder(n);
    if (sys.size() != n)
      throw invalid_input("size sweep: builder returned wrong chain size");
    try {
      for (Direction d : opts.directions) {
        const SteadyScenario sc = scenario_steady(sys, d, base);
        const double t_init =
            opts.t_init > 0 ? opts.t_init : base.cooling.t_cool;
        const double tau =
            scenario_relaxation_tau(sys, d, sc, t_init, opts.scan);
        (d == Direction::Axial ? pt.tau_axial : pt.tau_transverse) = tau;
        (d == Direction::Axial ? pt.has_tau_axial : pt.has_tau_transverse) =
            true;
      }
    } catch (const convergence_failure& e) {
      pt.skipped = true;
      pt.note = e.what();
    } catch (const no_steady_state& e) {
      pt.skipped = true;
      pt.note = e.what();
    }
    result.points.push_back(std::move(pt));
  }
  return result;
}

}  // namespace coolchain
