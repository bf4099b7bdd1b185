#include <catch2/catch_amalgamated.hpp>

#include "coolchain/constants.hpp"
#include "coolchain/units.hpp"

using namespace coolchain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
UnitSystem yb_at_10um() {
  return build_unit_system(IonSpecies::yb171(), 10e-6);
}
}  // namespace

TEST_CASE("unit system for Yb-171 at 10 um spacing", "[units]") {
  const UnitSystem u = yb_at_10um();

  // Known scales for this workhorse configuration.
  CHECK_THAT(u.omega0, WithinRel(9.0e5, 0.01));       // rad/s
  CHECK_THAT(u.t0_s, WithinRel(6.97e-6, 0.01));       // s
  CHECK_THAT(u.alpha, WithinRel(2.0e-3, 0.02));

  // alpha is defined exactly by hbar = alpha^2 omega0 m d0^2.
  CHECK_THAT(u.alpha * u.alpha * u.omega0 * u.mass_kg * u.d0_m * u.d0_m,
             WithinRel(constants::hbar, 1e-12));
}

TEST_CASE("doppler temperature in simulation units", "[units]") {
  const UnitSystem u = yb_at_10um();
  // k_B T_D / hbar = Gamma / 2 = 2 pi x 9.9 MHz for the Yb-171 S-P line.
  const double t_d = u.temperature_from_angular(constants::two_pi * 9.9e6);
  CHECK_THAT(t_d, WithinAbs(69.0, 0.7));

  // Same temperature through the kelvin route.
  const double t_d_kelvin =
      constants::hbar * constants::two_pi * 9.9e6 / constants::boltzmann;
  CHECK_THAT(u.temperature_to_sim(t_d_kelvin), WithinRel(t_d, 1e-12));
}

TEST_CASE("conversions round-trip", "[units]") {
  const UnitSystem u = yb_at_10um();
  CHECK_THAT(u.length_to_si(u.length_to_sim(3.7e-5)),
             WithinRel(3.7e-5, 1e-12));
  CHECK_THAT(u.time_to_si(u.time_to_sim(1.3e-3)), WithinRel(1.3e-3, 1e-12));
  CHECK_THAT(u.angular_frequency_to_si(u.angular_frequency_to_sim(2.1e6)),
             WithinRel(2.1e6, 1e-12));
  CHECK_THAT(u.temperature_to_si(u.temperature_to_sim(4.7e-4)),
             WithinRel(4.7e-4, 1e-12));

  // One trap period is 2 pi simulation time units.
  CHECK_THAT(u.time_to_sim(u.t0_s), WithinRel(constants::two_pi, 1e-12));
}

TEST_CASE("background heating rates in phonons per second", "[units]") {
  const UnitSystem u = yb_at_10um();
  const double kappa = 1e-4;

  // Lowest axial mode of the N = 20 reference chain, 2 pi x 34 kHz.
  const double w_axial = u.angular_frequency_to_sim(constants::two_pi * 34e3);
  CHECK_THAT(u.phonon_rate_per_second(kappa, w_axial), WithinAbs(60.5, 1.0));

  // Soft axial mode of the N = 121 quartic chain, 2 pi x 8.4 kHz.
  const double w_soft = u.angular_frequency_to_sim(constants::two_pi * 8.4e3);
  CHECK_THAT(u.phonon_rate_per_second(kappa, w_soft), WithinRel(240.0, 0.05));

  // Linear in kappa, inverse in omega.
  CHECK_THAT(u.phonon_rate_per_second(2 * kappa, w_axial),
             WithinRel(2 * u.phonon_rate_per_second(kappa, w_axial), 1e-12));
  CHECK_THAT(u.phonon_rate_per_second(kappa, 2 * w_axial),
             WithinRel(0.5 * u.phonon_rate_per_second(kappa, w_axial), 1e-12));
  CHECK(u.phonon_rate_per_second(0.0, w_axial) == 0.0);
}

TEST_CASE("unit system rejects bad input", "[units]") {
  CHECK_THROWS_AS(build_unit_system(IonSpecies::yb171(), 0.0), invalid_input);
  CHECK_THROWS_AS(build_unit_system(IonSpecies::yb171(), -1e-6), invalid_input);
  CHECK_THROWS_AS(build_unit_system(IonSpecies{-1.0, 1}, 1e-5), invalid_input);
  CHECK_THROWS_AS(build_unit_system(IonSpecies{171.0, 0}, 1e-5), invalid_input);

  const UnitSystem u = yb_at_10um();
  CHECK_THROWS_AS(u.phonon_rate_per_second(1e-4, 0.0), invalid_input);
  CHECK_THROWS_AS(u.phonon_rate_per_second(-1e-4, 1.0), invalid_input);
}
