#pragma once

#include <cmath>
#include <string>

#include "coolchain/constants.hpp"
#include "coolchain/errors.hpp"

namespace coolchain {

// The ion species only enters through its mass and charge.
struct IonSpecies {
  double mass_amu = constants::yb171_mass_amu;
  int charge = 1;

  static IonSpecies yb171() { return IonSpecies{constants::yb171_mass_amu, 1}; }
};

// Dimensionless unit system for a chain with characteristic spacing d0.
//
// Lengths are measured in d0, frequencies in omega0 = sqrt(q^2/(4 pi eps0
// m d0^3)), time in 1/omega0 (so one trap period 2 pi/omega0 is 2 pi time
// units), and temperatures as k_B T / (hbar omega0).  With these choices the
// Coulomb interaction between neighbours at unit distance has unit curvature,
// and hbar = m = 1 so quantum moments of x/alpha and p/alpha are the familiar
// oscillator ones.  alpha = sqrt(hbar/(m omega0))/d0 is the ratio of the
// ground-state length scale to the ion spacing; alpha^2 converts moments in
// "quantum units" to d0^2 units.
struct UnitSystem {
  IonSpecies species;
  double d0_m = 0;      // length unit in metres
  double omega0 = 0;    // frequency unit in rad/s
  double t0_s = 0;      // one period 2*pi/omega0, in seconds
  double alpha = 0;     // sqrt(hbar/(m omega0)) / d0, dimensionless
  double mass_kg = 0;

  // --- length ---
  double length_to_sim(double metres) const { return metres / d0_m; }
  double length_to_si(double x) const { return x * d0_m; }

  // --- time (sim time is omega0 * t) ---
  double time_to_sim(double seconds) const { return seconds * omega0; }
  double time_to_si(double t) const { return t / omega0; }

  // --- angular frequency ---
  double angular_frequency_to_sim(double rad_per_s) const {
    return rad_per_s / omega0;
  }
  double angular_frequency_to_si(double w) const { return w * omega0; }

  // --- temperature, dimensionless T = k_B T_SI / (hbar omega0) ---
  double temperature_to_sim(double kelvin) const {
    return kelvin * constants::boltzmann / (constants::hbar * omega0);
  }
  double temperature_to_si(double t) const {
    return t * constants::hbar * omega0 / constants::boltzmann;
  }
  // Temperatures quoted as an angular frequency k_B T / hbar in rad/s.
  double temperature_from_angular(double rad_per_s) const {
    return rad_per_s / omega0;
  }

  // Background heating of a mode at frequency omega_k (sim units) by local
  // baths of combined strength kappa = gamma * T (sim units): the classical
  // energy gain rate kappa * omega0 per ion, expressed as quanta of that
  // mode per second of wall time.
  double phonon_rate_per_second(double kappa, double omega_k) const {
    if (omega_k <= 0) throw invalid_input("phonon rate needs omega_k > 0");
    if (kappa < 0) throw invalid_input("phonon rate needs kappa >= 0");
    return kappa / omega_k * omega0 / constants::two_pi;
  }
};

// Builds the unit system for a species and a physical spacing d0 (metres).
inline UnitSystem build_unit_system(const IonSpecies& species, double d0_m) {
  if (d0_m <= 0) throw invalid_input("unit system needs d0 > 0");
  if (species.mass_amu <= 0) throw invalid_input("unit system needs mass > 0");
  if (species.charge < 1) throw invalid_input("unit system needs charge >= 1");

  UnitSystem u;
  u.species = species;
  u.d0_m = d0_m;
  u.mass_kg = species.mass_amu * constants::atomic_mass_unit;
  const double q2 = constants::coulomb_prefactor *
                    static_cast<double>(species.charge) *
                    static_cast<double>(species.charge);
  u.omega0 = std::sqrt(q2 / (u.mass_kg * d0_m * d0_m * d0_m));
  u.t0_s = constants::two_pi / u.omega0;
  u.alpha = std::sqrt(constants::hbar / (u.mass_kg * u.omega0)) / d0_m;
  return u;
}

}  // namespace coolchain
