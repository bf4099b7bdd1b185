#pragma once

// Physical constants (CODATA 2018, SI units).  The 2019 SI redefinition fixes
// e, h and k_B exactly; the others carry their CODATA uncertainty, which is
// far below anything this library resolves.

namespace coolchain::constants {

inline constexpr double elementary_charge = 1.602176634e-19;   // C, exact
inline constexpr double hbar = 1.054571817e-34;                // J s
inline constexpr double boltzmann = 1.380649e-23;              // J/K, exact
inline constexpr double vacuum_permittivity = 8.8541878128e-12;// F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

// Coulomb energy prefactor e^2 / (4 pi eps0), in J m.
inline constexpr double coulomb_prefactor =
    elementary_charge * elementary_charge /
    (4.0 * pi * vacuum_permittivity);

// Neutral-atom mass of 171Yb in u; the missing electron shifts the ion mass
// by ~3e-6 relative, well below the tolerances used anywhere here.
inline constexpr double yb171_mass_amu = 170.936330;

// Doppler limit of the 171Yb+ 369.5 nm cooling transition, quoted as the
// angular frequency k_B T_D / hbar = 2 pi x 9.9 MHz.
inline constexpr double yb171_doppler_angular = two_pi * 9.9e6;  // rad/s

}  // namespace coolchain::constants
