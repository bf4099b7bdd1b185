#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "coolchain/errors.hpp"
#include "coolchain/modes.hpp"

namespace coolchain {

// ---------------------------------------------------------------------------
// Local bath layout.  Each ion couples to its own bath (gamma_i, T_i): a few
// ions are laser cooled (rate gamma_cool to temperature t_cool, typically the
// Doppler limit) and the rest only see weak background heating of combined
// strength kappa = gamma_bg * t_bg.  Only the product is physical for the
// heated ions, so configurations fix kappa and pick t_bg separately.
// ---------------------------------------------------------------------------

struct EdgeCooling {
  int cool_per_side = 0;  // this many ions at each end of the chain
};

struct PeriodicCooling {
  int period = 2;  // every period-th ion, starting at the first
};

struct AllCooling {};  // every ion cooled; used for thermal references

using CoolingLayout = std::variant<EdgeCooling, PeriodicCooling, AllCooling>;

struct CoolingConfig {
  CoolingLayout layout;
  double gamma_cool = 0.1;
  double t_cool = 0;  // dimensionless k_B T / (hbar omega0)
};

struct BathAssignment {
  std::vector<double> gamma;        // per ion
  std::vector<double> temperature;  // per ion
  std::vector<int> cooled;          // 0-based indices
  std::vector<int> heated;

  int size() const { return static_cast<int>(gamma.size()); }
};

// Assigns per-ion baths.  kappa and t_bg describe the heated ions; their
// individual gamma_bg = kappa / t_bg is derived, and kappa = 0 turns the
// background off entirely.
inline BathAssignment assign_baths(const CoolingConfig& config, int n,
                                   double kappa, double t_bg) {
  if (n < 1) throw invalid_input("bath assignment needs at least one ion");
  if (config.gamma_cool < 0)
    throw invalid_input("bath assignment needs gamma_cool >= 0");
  if (config.t_cool < 0)
    throw invalid_input("bath assignment needs t_cool >= 0");
  if (kappa < 0) throw invalid_input("bath assignment needs kappa >= 0");
  if (kappa > 0 && t_bg <= 0)
    throw invalid_input("bath assignment needs t_bg > 0 when kappa > 0");

  std::vector<bool> is_cooled(n, false);
  if (const auto* e = std::get_if<EdgeCooling>(&config.layout)) {
    if (e->cool_per_side < 1)
      throw invalid_input("edge cooling needs cool_per_side >= 1");
    if (2 * e->cool_per_side >= n)
      throw invalid_input("edge cooling must leave at least one heated ion");
    for (int i = 0; i < e->cool_per_side; ++i) {
      is_cooled[i] = true;
      is_cooled[n - 1 - i] = true;
    }
  } else if (const auto* p = std::get_if<PeriodicCooling>(&config.layout)) {
    if (p->period < 2) throw invalid_input("periodic cooling needs period >= 2");
    if ((n - 1) % p->period != 0)
      throw invalid_input(
          "periodic cooling needs the period to divide N - 1 so both chain "
          "ends are cooled (N = " + std::to_string(n) +
          ", period = " + std::to_string(p->period) + ")");
    for (int i = 0; i < n; i += p->period) is_cooled[i] = true;
  } else {
    for (int i = 0; i < n; ++i) is_cooled[i] = true;
  }

  BathAssignment baths;
  baths.gamma.resize(n);
  baths.temperature.resize(n);
  const double gamma_bg = (kappa > 0) ? kappa / t_bg : 0.0;
  for (int i = 0; i < n; ++i) {
    if (is_cooled[i]) {
      baths.gamma[i] = config.gamma_cool;
      baths.temperature[i] = config.t_cool;
      baths.cooled.push_back(i);
    } else {
      baths.gamma[i] = gamma_bg;
      baths.temperature[i] = t_bg;
      baths.heated.push_back(i);
    }
  }
  return baths;
}

// Bose-Einstein occupation of a mode at frequency omega and temperature t
// (both dimensionless, t = k_B T / (hbar omega0)).  t = 0 gives 0; the
// classical limit t >> omega gives t/omega.
inline double bose_occupation(double omega, double t) {
  if (omega <= 0) throw invalid_input("bose occupation needs omega > 0");
  if (t < 0) throw invalid_input("bose occupation needs t >= 0");
  if (t == 0) return 0.0;
  return 1.0 / std::expm1(omega / t);
}

// ---------------------------------------------------------------------------
// Per-ion noise strengths.  A local bath at temperature T_i drives ion i
// with strength
//
//   Theta_i = sum_k omega_k G_ik^2 (n_B(omega_k, T_i) + 1/2),
//
// the ion-local thermal energy including zero point, in quantum units
// (divide the x^2 moments it produces by alpha^2 to compare with d0^2).
// In the classical limit Theta_i -> T_i independent of the mode structure.
// ---------------------------------------------------------------------------

inline std::vector<double> noise_strengths(const NormalModes& modes,
                                           const std::vector<double>& t) {
  const int n = modes.size();
  if (static_cast<int>(t.size()) != n)
    throw invalid_input("noise strengths: temperature size mismatch");

  std::vector<double> theta(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (t[i] < 0) throw invalid_input("noise strengths need t >= 0");
    double sum = 0;
    for (int k = 0; k < n; ++k) {
      const double w = modes.omega[k];
      const double g = modes.g(i, k);
      sum += w * g * g * (bose_occupation(w, t[i]) + 0.5);
    }
    theta[i] = sum;
  }
  return theta;
}

inline std::vector<double> noise_strengths(const NormalModes& modes,
                                           const BathAssignment& baths) {
  return noise_strengths(modes, baths.temperature);
}

}  // namespace coolchain
