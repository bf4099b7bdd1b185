#pragma once

#include <optional>

#include "coolchain/chain.hpp"
#include "coolchain/modes.hpp"
#include "coolchain/units.hpp"

namespace coolchain {

// Everything fixed by trap geometry alone: the equilibrium chain and its
// mode structure in both directions.  Baths and dynamics layer on top.
struct ChainSystem {
  UnitSystem units;
  ChainEquilibrium eq;
  ModeMatrix axial_matrix;
  NormalModes axial_modes;
  std::optional<double> omega_x;
  std::optional<ModeMatrix> transverse_matrix;
  std::optional<NormalModes> transverse_modes;

  int size() const { return eq.size(); }

  const ModeMatrix& matrix(Direction d) const {
    if (d == Direction::Axial) return axial_matrix;
    if (!transverse_matrix)
      throw invalid_input("system was built without transverse modes");
    return *transverse_matrix;
  }
  const NormalModes& modes(Direction d) const {
    if (d == Direction::Axial) return axial_modes;
    if (!transverse_modes)
      throw invalid_input("system was built without transverse modes");
    return *transverse_modes;
  }
};

inline ChainSystem build_chain_system(const UnitSystem& units,
                                      const TrapPotential& trap, int n,
                                      std::optional<double> omega_x = {}) {
  ChainSystem sys;
  sys.units = units;
  sys.eq = solve_equilibrium(trap, n);
  sys.axial_matrix = build_mode_matrix(sys.eq, Direction::Axial);
  sys.axial_modes = normal_modes(sys.axial_matrix);
  if (omega_x) {
    sys.omega_x = omega_x;
    sys.transverse_matrix =
        build_mode_matrix(sys.eq, Direction::Transverse, omega_x);
    sys.transverse_modes = normal_modes(*sys.transverse_matrix);
  }
  return sys;
}

}  // namespace coolchain
