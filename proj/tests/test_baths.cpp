#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "coolchain/baths.hpp"
#include "coolchain/chain.hpp"
#include "coolchain/modes.hpp"

using namespace coolchain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("edge cooling assignment", "[baths]") {
  CoolingConfig config{EdgeCooling{5}, 0.1, 69.0};
  const BathAssignment baths = assign_baths(config, 20, 1e-4, 138.0);

  REQUIRE(baths.cooled.size() == 10);
  REQUIRE(baths.heated.size() == 10);
  for (int i : {0, 1, 2, 3, 4, 15, 16, 17, 18, 19}) {
    CHECK(baths.gamma[i] == 0.1);
    CHECK(baths.temperature[i] == 69.0);
  }
  for (int i = 5; i < 15; ++i) {
    CHECK_THAT(baths.gamma[i] * baths.temperature[i], WithinRel(1e-4, 1e-12));
    CHECK(baths.temperature[i] == 138.0);
  }
}

TEST_CASE("periodic cooling assignment", "[baths]") {
  CoolingConfig config{PeriodicCooling{24}, 0.1, 69.0};
  const BathAssignment baths = assign_baths(config, 121, 1e-4, 690.0);
  const std::vector<int> expect{0, 24, 48, 72, 96, 120};
  REQUIRE(baths.cooled == expect);
  REQUIRE(baths.heated.size() == 115);

  // Both chain ends must end up cooled, so the period has to divide N-1.
  CoolingConfig bad{PeriodicCooling{10}, 0.1, 69.0};
  CHECK_THROWS_AS(assign_baths(bad, 20, 1e-4, 690.0), invalid_input);
  CHECK_NOTHROW(assign_baths(bad, 21, 1e-4, 690.0));
  CoolingConfig unit{PeriodicCooling{1}, 0.1, 69.0};
  CHECK_THROWS_AS(assign_baths(unit, 21, 1e-4, 690.0), invalid_input);
}

TEST_CASE("all-cooled layout and background off", "[baths]") {
  CoolingConfig all{AllCooling{}, 0.2, 69.0};
  const BathAssignment baths = assign_baths(all, 7, 0.0, 0.0);
  CHECK(baths.heated.empty());
  REQUIRE(baths.cooled.size() == 7);

  // kappa = 0 leaves the heated ions entirely uncoupled.
  CoolingConfig edge{EdgeCooling{1}, 0.2, 69.0};
  const BathAssignment off = assign_baths(edge, 5, 0.0, 0.0);
  for (int i : off.heated) CHECK(off.gamma[i] == 0.0);
}

TEST_CASE("bath assignment rejects bad input", "[baths]") {
  CoolingConfig edge{EdgeCooling{3}, 0.1, 69.0};
  CHECK_THROWS_AS(assign_baths(edge, 6, 1e-4, 1.0), invalid_input);  // no heated
  CHECK_THROWS_AS(assign_baths(edge, 0, 1e-4, 1.0), invalid_input);
  CHECK_THROWS_AS(assign_baths(edge, 20, -1e-4, 1.0), invalid_input);
  CHECK_THROWS_AS(assign_baths(edge, 20, 1e-4, 0.0), invalid_input);
  CoolingConfig neg{EdgeCooling{3}, -0.1, 69.0};
  CHECK_THROWS_AS(assign_baths(neg, 20, 1e-4, 1.0), invalid_input);
  CoolingConfig zero_side{EdgeCooling{0}, 0.1, 69.0};
  CHECK_THROWS_AS(assign_baths(zero_side, 20, 1e-4, 1.0), invalid_input);
}

TEST_CASE("bose occupation limits", "[baths]") {
  CHECK(bose_occupation(1.0, 0.0) == 0.0);
  // Occupation 1 exactly when omega/T = ln 2.
  CHECK_THAT(bose_occupation(1.0, 1.0 / std::log(2.0)), WithinRel(1.0, 1e-12));
  // Classical limit n -> T/omega - 1/2 + O(omega/T).
  CHECK_THAT(bose_occupation(1.0, 100.0), WithinAbs(99.5, 1e-3));
  // Deep quantum limit is exponentially empty.
  CHECK(bose_occupation(10.0, 0.5) < 3e-9);
  CHECK_THROWS_AS(bose_occupation(0.0, 1.0), invalid_input);
  CHECK_THROWS_AS(bose_occupation(1.0, -1.0), invalid_input);
}

TEST_CASE("noise strengths: floors and limits", "[baths]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 5);
  const NormalModes m = normal_modes(build_mode_matrix(eq, Direction::Axial));

  // Zero temperature leaves the zero-point contribution only.
  const std::vector<double> zero(5, 0.0);
  const std::vector<double> theta0 = noise_strengths(m, zero);
  for (int i = 0; i < 5; ++i) {
    double floor = 0;
    for (int k = 0; k < 5; ++k)
      floor += 0.5 * m.omega[k] * m.g(i, k) * m.g(i, k);
    CHECK_THAT(theta0[i], WithinRel(floor, 1e-12));
    CHECK(theta0[i] > 0);
  }

  // Monotone in temperature, pointwise.
  const std::vector<double> cold(5, 10.0), hot(5, 20.0);
  const std::vector<double> theta_cold = noise_strengths(m, cold);
  const std::vector<double> theta_hot = noise_strengths(m, hot);
  for (int i = 0; i < 5; ++i) CHECK(theta_hot[i] > theta_cold[i]);

  // Classical limit: Theta_i -> T regardless of the mode structure.
  const std::vector<double> classical(5, 1e5);
  for (double th : noise_strengths(m, classical))
    CHECK_THAT(th, WithinRel(1e5, 1e-8));

  CHECK_THROWS_AS(noise_strengths(m, std::vector<double>(4, 1.0)),
                  invalid_input);
  CHECK_THROWS_AS(noise_strengths(m, std::vector<double>(5, -1.0)),
                  invalid_input);
}

TEST_CASE("noise strengths follow the bath assignment", "[baths]") {
  const ChainEquilibrium eq = solve_equilibrium(HarmonicTrap{1.0}, 9);
  const NormalModes m = normal_modes(build_mode_matrix(eq, Direction::Axial));
  CoolingConfig config{EdgeCooling{2}, 0.1, 50.0};
  const BathAssignment baths = assign_baths(config, 9, 1e-4, 500.0);
  const std::vector<double> theta = noise_strengths(m, baths);
  const std::vector<double> direct = noise_strengths(m, baths.temperature);
  for (int i = 0; i < 9; ++i) CHECK(theta[i] == direct[i]);
  // Hotter baths on the inner ions mean larger noise there.
  CHECK(theta[4] > theta[0]);
}
