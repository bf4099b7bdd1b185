#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coolchain/baths.hpp"
#include "coolchain/chain.hpp"
#include "coolchain/constants.hpp"
#include "coolchain/errors.hpp"
#include "coolchain/modes.hpp"
#include "coolchain/oracle.hpp"
#include "coolchain/relaxation.hpp"
#include "coolchain/units.hpp"
#include "coolchain/version.hpp"

namespace coolchain {

// ---------------------------------------------------------------------------
// Run configuration.  Files are JSON; every physical input accepts either a
// plain number (already in simulation units) or an SI string such as
// "2pi x 5.1 MHz", "2π×34 kHz", "10 um", "0.48 mK", "20 t0".  Temperatures
// also accept "doppler" (optionally scaled: "2 doppler") and the background
// temperature accepts "upper_bound".  Unknown keys are rejected with the
// offending key path.
// ---------------------------------------------------------------------------

namespace detail {

struct QuantityParts {
  double value = 1.0;
  bool two_pi = false;
  std::string unit;
};

inline bool strip_prefix(std::string& s, const std::string& prefix) {
  if (s.rfind(prefix, 0) != 0) return false;
  s.erase(0, prefix.size());
  return true;
}

inline std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

// Splits "2pi x 5.1 MHz" style strings into multiplier, 2pi flag and unit.
// A missing leading number means 1 ("doppler" alone).
inline QuantityParts split_quantity(const std::string& raw,
                                    const std::string& path) {
  QuantityParts parts;
  std::string s = trimmed(raw);
  if (strip_prefix(s, "2pi") || strip_prefix(s, "2\xcf\x80")) {
    parts.two_pi = true;
    s = trimmed(s);
    if (!strip_prefix(s, "x") && !strip_prefix(s, "*") &&
        !strip_prefix(s, "\xc3\x97"))
      throw config_error("config: " + path +
                         ": expected 'x' after 2pi in \"" + raw + "\"");
    s = trimmed(s);
  }
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin) {
    parts.value = v;
    s = trimmed(std::string(end));
  }
  parts.unit = s;
  if (parts.unit.empty())
    throw config_error("config: " + path + ": quantity string \"" + raw +
                       "\" has no unit (use a plain number for simulation "
                       "units)");
  return parts;
}

inline double unit_scale(const std::string& unit, const std::string& path,
                         std::initializer_list<std::pair<const char*, double>>
                             table) {
  for (const auto& [name, scale] : table)
    if (unit == name) return scale;
  std::string known;
  for (const auto& [name, scale] : table) {
    if (!known.empty()) known += ", ";
    known += name;
  }
  throw config_error("config: " + path + ": unknown unit \"" + unit +
                     "\" (expected one of: " + known + ")");
}

}  // namespace detail

// Angular frequency in units of omega0.  Hz-family units denote cyclic
// frequencies and always pick up the 2 pi, whether or not it is spelled out.
inline double parse_angular_frequency(const nlohmann::json& v,
                                      const UnitSystem& units,
                                      const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string())
    throw config_error("config: " + path + ": expected number or string");
  const auto parts = detail::split_quantity(v.get<std::string>(), path);
  if (parts.unit == "rad/s")
    return units.angular_frequency_to_sim(
        parts.value * (parts.two_pi ? constants::two_pi : 1.0));
  const double hz = parts.value * detail::unit_scale(parts.unit, path,
                                                     {{"Hz", 1.0},
                                                      {"kHz", 1e3},
                                                      {"MHz", 1e6},
                                                      {"GHz", 1e9}});
  return units.angular_frequency_to_sim(constants::two_pi * hz);
}

// Length in units of d0; plain numbers are already d0 multiples.
inline double parse_length(const nlohmann::json& v, const UnitSystem& units,
                           const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string())
    throw config_error("config: " + path + ": expected number or string");
  const auto parts = detail::split_quantity(v.get<std::string>(), path);
  const double metres =
      parts.value * detail::unit_scale(parts.unit, path,
                                       {{"m", 1.0},
                                        {"mm", 1e-3},
                                        {"um", 1e-6},
                                        {"\xc2\xb5m", 1e-6},
                                        {"nm", 1e-9}});
  return units.length_to_sim(metres);
}

// Temperature as k_B T / (hbar omega0); "doppler" is the species Doppler
// limit, optionally scaled ("2 doppler").
inline double parse_temperature(const nlohmann::json& v,
                                const UnitSystem& units,
                                const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string())
    throw config_error("config: " + path + ": expected number or string");
  const auto parts = detail::split_quantity(v.get<std::string>(), path);
  if (parts.unit == "doppler")
    return parts.value *
           units.temperature_from_angular(constants::yb171_doppler_angular);
  const double kelvin =
      parts.value * detail::unit_scale(parts.unit, path,
                                       {{"K", 1.0},
                                        {"mK", 1e-3},
                                        {"uK", 1e-6},
                                        {"\xc2\xb5K", 1e-6}});
  return units.temperature_to_sim(kelvin);
}

// Time in units of 1/omega0; "t0" counts trap periods (t0 = 2 pi).
inline double parse_time(const nlohmann::json& v, const UnitSystem& units,
                         const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string())
    throw config_error("config: " + path + ": expected number or string");
  const auto parts = detail::split_quantity(v.get<std::string>(), path);
  if (parts.unit == "t0") return parts.value * constants::two_pi;
  const double seconds =
      parts.value * detail::unit_scale(parts.unit, path,
                                       {{"s", 1.0},
                                        {"ms", 1e-3},
                                        {"us", 1e-6},
                                        {"\xc2\xb5s", 1e-6},
                                        {"ns", 1e-9}});
  return units.time_to_sim(seconds);
}

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* name : allowed)
      if (item.key() == name) {
        known = true;
        break;
      }
    if (!known)
      throw config_error("config: unknown key \"" +
                         (path.empty() ? item.key() : path + "." + item.key()) +
                         "\"");
  }
}

inline const nlohmann::json* find(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <typename T>
T get_as(const nlohmann::json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config: " + path + ": " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Configuration structs, all in simulation units after parsing.
// ---------------------------------------------------------------------------

struct TrapConfig {
  std::string kind = "harmonic";  // harmonic | quartic | quartic_fit | uniform
  double omega_z = 0;             // harmonic
  double alpha2 = 0, alpha4 = 0;  // quartic
  double target_spacing = 1.0;    // quartic_fit: windowed mean spacing
  int exclude = 10;               // quartic_fit: ions dropped per side
  double spacing = 1.0;           // uniform
  double axial_omega = 0;         // uniform: lowest axial mode
};

struct SweepConfig {
  std::vector<double> gamma_grid;
  std::vector<int> period_grid;
  std::vector<int> size_grid;
  std::vector<int> edge_grid;  // cooled ions per side
  bool relaxation = false;
};

struct TimeConfig {
  double t_end = 0;       // raw series span; 0 picks a window multiple
  int raw_samples = 2000;
  double t_init = 0;      // initial thermal temperature; 0 means t_cool
  RelaxationScanOptions scan;
};

struct OracleConfig {
  LangevinConfig langevin{0.02, 1200.0, 400.0, 0.2, 200, 1};
  double z_threshold = 4.0;
};

struct RunConfig {
  IonSpecies species = IonSpecies::yb171();
  double d0_m = 10e-6;
  UnitSystem units;  // derived from species + d0
  int n = 0;
  TrapConfig trap;
  double omega_x = 0;  // 0: axial only
  std::vector<Direction> directions;
  CoolingConfig cooling;
  double kappa = 0;
  double t_bg = 0;  // 0: worst-case upper bound
  SweepConfig sweep;
  TimeConfig time;
  OracleConfig oracle;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
};

inline TrapPotential trap_potential(const TrapConfig& t) {
  if (t.kind == "harmonic") return HarmonicTrap{t.omega_z};
  if (t.kind == "quartic") return QuarticTrap{t.alpha2, t.alpha4};
  if (t.kind == "uniform") return UniformTrap{t.spacing, t.axial_omega};
  throw invalid_input("trap kind \"" + t.kind +
                      "\" has no direct potential (quartic_fit must be "
                      "resolved first)");
}

// ---------------------------------------------------------------------------
// Parsing.
// ---------------------------------------------------------------------------

namespace detail {

inline IonSpecies parse_species(const nlohmann::json& v,
                                const std::string& path) {
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "171Yb+") return IonSpecies::yb171();
    throw config_error("config: " + path + ": unknown species \"" + name +
                       "\" (use \"171Yb+\" or {\"mass_amu\":..., "
                       "\"charge\":...})");
  }
  if (!v.is_object())
    throw config_error("config: " + path + ": expected string or object");
  reject_unknown(v, path, {"mass_amu", "charge"});
  IonSpecies sp;
  if (const auto* m = find(v, "mass_amu"))
    sp.mass_amu = get_as<double>(*m, path + ".mass_amu");
  else
    throw config_error("config: " + path + ".mass_amu is required");
  if (const auto* c = find(v, "charge"))
    sp.charge = get_as<int>(*c, path + ".charge");
  return sp;
}

inline TrapConfig parse_trap(const nlohmann::json& v, const UnitSystem& units,
                             const std::string& path) {
  if (!v.is_object())
    throw config_error("config: " + path + ": expected object");
  TrapConfig t;
  const auto* kind = find(v, "kind");
  if (!kind) throw config_error("config: " + path + ".kind is required");
  t.kind = get_as<std::string>(*kind, path + ".kind");

  if (t.kind == "harmonic") {
    reject_unknown(v, path, {"kind", "omega_z"});
    const auto* w = find(v, "omega_z");
    if (!w) throw config_error("config: " + path + ".omega_z is required");
    t.omega_z = parse_angular_frequency(*w, units, path + ".omega_z");
  } else if (t.kind == "quartic") {
    reject_unknown(v, path, {"kind", "alpha2", "alpha4"});
    const auto* a2 = find(v, "alpha2");
    const auto* a4 = find(v, "alpha4");
    if (!a2 || !a4)
      throw config_error("config: " + path +
                         " needs alpha2 and alpha4 (simulation units)");
    t.alpha2 = get_as<double>(*a2, path + ".alpha2");
    t.alpha4 = get_as<double>(*a4, path + ".alpha4");
  } else if (t.kind == "quartic_fit") {
    reject_unknown(v, path, {"kind", "target_spacing", "exclude"});
    if (const auto* s = find(v, "target_spacing"))
      t.target_spacing = parse_length(*s, units, path + ".target_spacing");
    if (const auto* e = find(v, "exclude"))
      t.exclude = get_as<int>(*e, path + ".exclude");
  } else if (t.kind == "uniform") {
    reject_unknown(v, path, {"kind", "spacing", "axial_omega"});
    if (const auto* s = find(v, "spacing"))
      t.spacing = parse_length(*s, units, path + ".spacing");
    const auto* w = find(v, "axial_omega");
    if (!w) throw config_error("config: " + path + ".axial_omega is required");
    t.axial_omega = parse_angular_frequency(*w, units, path + ".axial_omega");
  } else {
    throw config_error("config: " + path + ".kind: unknown trap kind \"" +
                       t.kind +
                       "\" (harmonic | quartic | quartic_fit | uniform)");
  }
  return t;
}

inline CoolingConfig parse_cooling(const nlohmann::json& v,
                                   const UnitSystem& units,
                                   const std::string& path) {
  if (!v.is_object())
    throw config_error("config: " + path + ": expected object");
  reject_unknown(v, path,
                 {"layout", "cool_per_side", "period", "gamma", "t_cool"});
  CoolingConfig c;
  const auto* layout = find(v, "layout");
  if (!layout) throw config_error("config: " + path + ".layout is required");
  const std::string kind = get_as<std::string>(*layout, path + ".layout");
  if (kind == "edge") {
    const auto* cps = find(v, "cool_per_side");
    if (!cps)
      throw config_error("config: " + path + ".cool_per_side is required");
    c.layout = EdgeCooling{get_as<int>(*cps, path + ".cool_per_side")};
  } else if (kind == "periodic") {
    const auto* p = find(v, "period");
    if (!p) throw config_error("config: " + path + ".period is required");
    c.layout = PeriodicCooling{get_as<int>(*p, path + ".period")};
  } else if (kind == "all") {
    c.layout = AllCooling{};
  } else {
    throw config_error("config: " + path + ".layout: unknown layout \"" +
                       kind + "\" (edge | periodic | all)");
  }
  if (const auto* g = find(v, "gamma"))
    c.gamma_cool = get_as<double>(*g, path + ".gamma");
  if (const auto* t = find(v, "t_cool"))
    c.t_cool = parse_temperature(*t, units, path + ".t_cool");
  else
    c.t_cool =
        units.temperature_from_angular(constants::yb171_doppler_angular);
  return c;
}

inline SweepConfig parse_sweep(const nlohmann::json& v,
                               const std::string& path) {
  if (!v.is_object())
    throw config_error("config: " + path + ": expected object");
  reject_unknown(v, path, {"gamma_grid", "period_grid", "size_grid",
                           "edge_grid", "relaxation"});
  SweepConfig s;
  if (const auto* g = find(v, "gamma_grid"))
    s.gamma_grid = get_as<std::vector<double>>(*g, path + ".gamma_grid");
  if (const auto* p = find(v, "period_grid"))
    s.period_grid = get_as<std::vector<int>>(*p, path + ".period_grid");
  if (const auto* n = find(v, "size_grid"))
    s.size_grid = get_as<std::vector<int>>(*n, path + ".size_grid");
  if (const auto* e = find(v, "edge_grid"))
    s.edge_grid = get_as<std::vector<int>>(*e, path + ".edge_grid");
  if (const auto* r = find(v, "relaxation"))
    s.relaxation = get_as<bool>(*r, path + ".relaxation");
  return s;
}

inline TimeConfig parse_time_section(const nlohmann::json& v,
                                     const UnitSystem& units,
                                     const std::string& path) {
  if (!v.is_object())
    throw config_error("config: " + path + ": expected object");
  reject_unknown(v, path,
                 {"t_end", "raw_samples", "t_init", "window",
                  "samples_per_window", "criterion", "growth",
                  "contiguous_prefix", "max_probes", "bisect_iterations"});
  TimeConfig t;
  if (const auto* e = find(v, "t_end"))
    t.t_end = parse_time(*e, units, path + ".t_end");
  if (const auto* r = find(v, "raw_samples"))
    t.raw_samples = get_as<int>(*r, path + ".raw_samples");
  if (const auto* i = find(v, "t_init"))
    t.t_init = parse_temperature(*i, units, path + ".t_init");
  if (const auto* w = find(v, "window"))
    t.scan.window = parse_time(*w, units, path + ".window");
  if (const auto* s = find(v, "samples_per_window"))
    t.scan.samples_per_window =
        get_as<int>(*s, path + ".samples_per_window");
  if (const auto* c = find(v, "criterion"))
    t.scan.criterion = get_as<double>(*c, path + ".criterion");
  if (const auto* g = find(v, "growth"))
    t.scan.growth = get_as<double>(*g, path + ".growth");
  if (const auto* p = find(v, "contiguous_prefix"))
    t.scan.contiguous_prefix = get_as<int>(*p, path + ".contiguous_prefix");
  if (const auto* m = find(v, "max_probes"))
    t.scan.max_probes = get_as<int>(*m, path + ".max_probes");
  if (const auto* b = find(v, "bisect_iterations"))
    t.scan.bisect_iterations = get_as<int>(*b, path + ".bisect_iterations");
  return t;
}

inline OracleConfig parse_oracle(const nlohmann::json& v,
                                 const UnitSystem& units,
                                 const std::string& path) {
  if (!v.is_object())
    throw config_error("config: " + path + ": expected object");
  reject_unknown(v, path, {"dt", "t_end", "t_burn", "sample_interval",
                           "trajectories", "z_threshold"});
  OracleConfig o;
  if (const auto* d = find(v, "dt"))
    o.langevin.dt = parse_time(*d, units, path + ".dt");
  if (const auto* e = find(v, "t_end"))
    o.langevin.t_end = parse_time(*e, units, path + ".t_end");
  if (const auto* b = find(v, "t_burn"))
    o.langevin.t_burn = parse_time(*b, units, path + ".t_burn");
  if (const auto* s = find(v, "sample_interval"))
    o.langevin.sample_interval =
        parse_time(*s, units, path + ".sample_interval");
  if (const auto* n = find(v, "trajectories"))
    o.langevin.n_traj = get_as<int>(*n, path + ".trajectories");
  if (const auto* z = find(v, "z_threshold"))
    o.z_threshold = get_as<double>(*z, path + ".z_threshold");
  return o;
}

}  // namespace detail

// Validates everything that can be checked without running: module
// preconditions surface here as config errors, before any file is written.
inline void validate_run_config(const RunConfig& c) {
  auto fail = [](const std::string& msg) {
    throw config_error("config: " + msg);
  };
  if (c.n < 1) fail("n must be >= 1");
  if (c.trap.kind == "harmonic" && c.trap.omega_z <= 0)
    fail("trap.omega_z must be positive");
  if (c.trap.kind == "quartic" && c.trap.alpha4 < 0)
    fail("trap.alpha4 must be non-negative");
  if (c.trap.kind == "quartic_fit") {
    if (c.trap.target_spacing <= 0) fail("trap.target_spacing must be positive");
    if (c.trap.exclude < 0) fail("trap.exclude must be >= 0");
    if (c.n - 2 * c.trap.exclude < 2)
      fail("trap.exclude leaves no spacing window for the fit");
  }
  if (c.trap.kind == "uniform") {
    if (c.trap.spacing <= 0) fail("trap.spacing must be positive");
    if (c.trap.axial_omega <= 0) fail("trap.axial_omega must be positive");
  }
  if (c.directions.empty()) fail("directions must not be empty");
  for (Direction d : c.directions)
    if (d == Direction::Transverse && c.omega_x <= 0)
      fail("transverse direction needs omega_x > 0");
  if (c.cooling.gamma_cool < 0) fail("cooling.gamma must be >= 0");
  if (c.cooling.t_cool < 0) fail("cooling.t_cool must be >= 0");
  if (c.kappa < 0) fail("background.kappa must be >= 0");
  if (c.t_bg < 0) fail("background.t_bg must be >= 0");
  try {
    assign_baths(c.cooling, c.n, 0.0, 0.0);
  } catch (const invalid_input& e) {
    fail(std::string("cooling layout: ") + e.what());
  }
  for (double g : c.sweep.gamma_grid)
    if (g <= 0) fail("sweep.gamma_grid entries must be positive");
  for (int n : c.sweep.size_grid)
    if (n < 2) fail("sweep.size_grid entries must be >= 2");
  if (c.time.t_end < 0) fail("time.t_end must be >= 0");
  if (c.time.raw_samples < 2) fail("time.raw_samples must be >= 2");
  if (c.time.t_init < 0) fail("time.t_init must be >= 0");
  if (c.time.scan.window <= 0) fail("time.window must be positive");
  if (c.time.scan.samples_per_window < 2)
    fail("time.samples_per_window must be >= 2");
  if (c.time.scan.criterion <= 0) fail("time.criterion must be positive");
  if (c.oracle.langevin.dt <= 0) fail("oracle.dt must be positive");
  if (c.oracle.langevin.t_end <= c.oracle.langevin.t_burn)
    fail("oracle.t_end must exceed oracle.t_burn");
  if (c.oracle.langevin.n_traj < 2) fail("oracle.trajectories must be >= 2");
  if (c.oracle.z_threshold <= 0) fail("oracle.z_threshold must be positive");
}

// Parses a full run configuration.  A top-level "config" key marks a
// snapshot file; the wrapper's version and constants records are ignored on
// re-read (values are re-derived, and snapshots store resolved numbers).
inline RunConfig parse_run_config(const nlohmann::json& root) {
  if (!root.is_object())
    throw config_error("config: top level must be an object");
  if (detail::find(root, "config")) {
    detail::reject_unknown(root, "", {"version", "constants", "config"});
    return parse_run_config(*detail::find(root, "config"));
  }
  detail::reject_unknown(
      root, "",
      {"species", "d0", "n", "trap", "omega_x", "directions", "cooling",
       "background", "sweep", "time", "oracle", "output", "seed"});

  RunConfig c;
  if (const auto* s = detail::find(root, "species"))
    c.species = detail::parse_species(*s, "species");
  if (const auto* d = detail::find(root, "d0")) {
    if (d->is_number())
      c.d0_m = d->get<double>();  // metres
    else {
      // Parse through a provisional metre-based unit system; only the
      // metre conversion of the string is wanted here.
      UnitSystem metres;
      metres.d0_m = 1.0;
      c.d0_m = parse_length(*d, metres, "d0");
    }
  }
  if (c.d0_m <= 0) throw config_error("config: d0 must be positive");
  try {
    c.units = build_unit_system(c.species, c.d0_m);
  } catch (const invalid_input& e) {
    throw config_error(std::string("config: species: ") + e.what());
  }

  const auto* n = detail::find(root, "n");
  if (!n) throw config_error("config: n is required");
  c.n = detail::get_as<int>(*n, "n");

  const auto* trap = detail::find(root, "trap");
  if (!trap) throw config_error("config: trap is required");
  c.trap = detail::parse_trap(*trap, c.units, "trap");

  if (const auto* w = detail::find(root, "omega_x"))
    c.omega_x = parse_angular_frequency(*w, c.units, "omega_x");

  if (const auto* dirs = detail::find(root, "directions")) {
    if (!dirs->is_array())
      throw config_error("config: directions: expected array");
    for (const auto& d : *dirs) {
      const std::string name = detail::get_as<std::string>(d, "directions");
      if (name == "axial")
        c.directions.push_back(Direction::Axial);
      else if (name == "transverse")
        c.directions.push_back(Direction::Transverse);
      else
        throw config_error("config: directions: unknown direction \"" + name +
                           "\" (axial | transverse)");
    }
  } else {
    c.directions = {Direction::Axial};
    if (c.omega_x > 0) c.directions.push_back(Direction::Transverse);
  }

  if (const auto* cool = detail::find(root, "cooling"))
    c.cooling = detail::parse_cooling(*cool, c.units, "cooling");
  else {
    c.cooling.layout = AllCooling{};
    c.cooling.t_cool =
        c.units.temperature_from_angular(constants::yb171_doppler_angular);
  }

  if (const auto* bg = detail::find(root, "background")) {
    if (!bg->is_object())
      throw config_error("config: background: expected object");
    detail::reject_unknown(*bg, "background", {"kappa", "t_bg"});
    if (const auto* k = detail::find(*bg, "kappa"))
      c.kappa = detail::get_as<double>(*k, "background.kappa");
    if (const auto* t = detail::find(*bg, "t_bg")) {
      if (t->is_string() && t->get<std::string>() == "upper_bound")
        c.t_bg = 0;
      else
        c.t_bg = parse_temperature(*t, c.units, "background.t_bg");
    }
  }

  if (const auto* sw = detail::find(root, "sweep"))
    c.sweep = detail::parse_sweep(*sw, "sweep");
  if (const auto* tm = detail::find(root, "time"))
    c.time = detail::parse_time_section(*tm, c.units, "time");
  if (const auto* oc = detail::find(root, "oracle"))
    c.oracle = detail::parse_oracle(*oc, c.units, "oracle");
  if (const auto* out = detail::find(root, "output"))
    c.out_dir = detail::get_as<std::string>(*out, "output");
  if (const auto* seed = detail::find(root, "seed"))
    c.seed = detail::get_as<std::uint64_t>(*seed, "seed");

  validate_run_config(c);
  return c;
}

inline RunConfig parse_run_config_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  return parse_run_config(root);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// Snapshot: the resolved configuration (plain simulation-unit numbers), the
// constants it was derived with, and the library version.  A snapshot file
// is itself a valid --config input and reruns bit-identically.
// ---------------------------------------------------------------------------

inline nlohmann::json to_snapshot_json(const RunConfig& c) {
  using nlohmann::json;
  json trap;
  trap["kind"] = c.trap.kind;
  if (c.trap.kind == "harmonic") trap["omega_z"] = c.trap.omega_z;
  if (c.trap.kind == "quartic") {
    trap["alpha2"] = c.trap.alpha2;
    trap["alpha4"] = c.trap.alpha4;
  }
  if (c.trap.kind == "quartic_fit") {
    trap["target_spacing"] = c.trap.target_spacing;
    trap["exclude"] = c.trap.exclude;
  }
  if (c.trap.kind == "uniform") {
    trap["spacing"] = c.trap.spacing;
    trap["axial_omega"] = c.trap.axial_omega;
  }

  json cooling;
  if (const auto* e = std::get_if<EdgeCooling>(&c.cooling.layout)) {
    cooling["layout"] = "edge";
    cooling["cool_per_side"] = e->cool_per_side;
  } else if (const auto* p = std::get_if<PeriodicCooling>(&c.cooling.layout)) {
    cooling["layout"] = "periodic";
    cooling["period"] = p->period;
  } else {
    cooling["layout"] = "all";
  }
  cooling["gamma"] = c.cooling.gamma_cool;
  cooling["t_cool"] = c.cooling.t_cool;

  json dirs = json::array();
  for (Direction d : c.directions)
    dirs.push_back(d == Direction::Axial ? "axial" : "transverse");

  json background;
  background["kappa"] = c.kappa;
  if (c.t_bg > 0)
    background["t_bg"] = c.t_bg;
  else
    background["t_bg"] = "upper_bound";

  json sweep;
  sweep["gamma_grid"] = c.sweep.gamma_grid;
  sweep["period_grid"] = c.sweep.period_grid;
  sweep["size_grid"] = c.sweep.size_grid;
  sweep["edge_grid"] = c.sweep.edge_grid;
  sweep["relaxation"] = c.sweep.relaxation;

  json time;
  time["t_end"] = c.time.t_end;
  time["raw_samples"] = c.time.raw_samples;
  time["t_init"] = c.time.t_init;
  time["window"] = c.time.scan.window;
  time["samples_per_window"] = c.time.scan.samples_per_window;
  time["criterion"] = c.time.scan.criterion;
  time["growth"] = c.time.scan.growth;
  time["contiguous_prefix"] = c.time.scan.contiguous_prefix;
  time["max_probes"] = c.time.scan.max_probes;
  time["bisect_iterations"] = c.time.scan.bisect_iterations;

  json oracle;
  oracle["dt"] = c.oracle.langevin.dt;
  oracle["t_end"] = c.oracle.langevin.t_end;
  oracle["t_burn"] = c.oracle.langevin.t_burn;
  oracle["sample_interval"] = c.oracle.langevin.sample_interval;
  oracle["trajectories"] = c.oracle.langevin.n_traj;
  oracle["z_threshold"] = c.oracle.z_threshold;

  json config;
  config["species"] = {{"mass_amu", c.species.mass_amu},
                       {"charge", c.species.charge}};
  config["d0"] = c.d0_m;
  config["n"] = c.n;
  config["trap"] = trap;
  config["omega_x"] = c.omega_x;
  config["directions"] = dirs;
  config["cooling"] = cooling;
  config["background"] = background;
  config["sweep"] = sweep;
  config["time"] = time;
  config["oracle"] = oracle;
  config["output"] = c.out_dir;
  config["seed"] = c.seed;

  json root;
  root["version"] = version_string;
  root["constants"] = {
      {"elementary_charge", constants::elementary_charge},
      {"hbar", constants::hbar},
      {"boltzmann", constants::boltzmann},
      {"vacuum_permittivity", constants::vacuum_permittivity},
      {"atomic_mass_unit", constants::atomic_mass_unit},
      {"mass_kg", c.units.mass_kg},
      {"omega0_rad_s", c.units.omega0},
      {"t0_s", c.units.t0_s},
      {"alpha", c.units.alpha},
      {"doppler_angular_rad_s", constants::yb171_doppler_angular}};
  root["config"] = config;
  return root;
}

// ---------------------------------------------------------------------------
// Bundled presets, one per standard study scenario.  The same files ship in
// presets/ for editing; these embedded copies back --preset NAME.
// ---------------------------------------------------------------------------

inline const std::vector<std::pair<std::string, const char*>>& preset_table() {
  static const std::vector<std::pair<std::string, const char*>> presets = {
      {"fig1", R"({
  "species": "171Yb+",
  "d0": "10 um",
  "n": 20,
  "trap": { "kind": "harmonic", "omega_z": "2pi x 34 kHz" },
  "omega_x": "2pi x 5.1 MHz",
  "directions": ["axial", "transverse"],
  "cooling": { "layout": "all", "gamma": 0.1, "t_cool": "doppler" },
  "background": { "kappa": 0 },
  "output": "runs/fig1",
  "seed": 1
})"},
      {"fig2", R"({
  "species": "171Yb+",
  "d0": "10 um",
  "n": 20,
  "trap": { "kind": "harmonic", "omega_z": "2pi x 34 kHz" },
  "omega_x": "2pi x 5.1 MHz",
  "directions": ["axial", "transverse"],
  "cooling": { "layout": "edge", "cool_per_side": 5, "gamma": 0.1, "t_cool": "doppler" },
  "background": { "kappa": 1e-4, "t_bg": "upper_bound" },
  "output": "runs/fig2",
  "seed": 1
})"},
      {"fig3", R"({
  "species": "171Yb+",
  "d0": "10 um",
  "n": 121,
  "trap": { "kind": "quartic_fit", "target_spacing": "10 um", "exclude": 10 },
  "omega_x": "2pi x 5.1 MHz",
  "directions": ["axial", "transverse"],
  "cooling": { "layout": "edge", "cool_per_side": 10, "gamma": 0.1, "t_cool": "doppler" },
  "background": { "kappa": 1e-4, "t_bg": "upper_bound" },
  "output": "runs/fig3",
  "seed": 1
})"},
      {"fig4", R"({
  "species": "171Yb+",
  "d0": "10 um",
  "n": 121,
  "trap": { "kind": "quartic_fit", "target_spacing": "10 um", "exclude": 10 },
  "omega_x": "2pi x 5.1 MHz",
  "directions": ["axial", "transverse"],
  "cooling": { "layout": "edge", "cool_per_side": 10, "gamma": 0.1, "t_cool": "doppler" },
  "background": { "kappa": 1e-4, "t_bg": "upper_bound" },
  "sweep": { "edge_grid": [5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55] },
  "output": "runs/fig4",
  "seed": 1
})"},
      {"fig5", R"({
  "species": "171Yb+",
  "d0": "10 um",
  "n": 121,
  "trap": { "kind": "quartic_fit", "target_spacing": "10 um", "exclude": 10 },
  "omega_x": "2pi x 5.1 MHz",
  "directions": ["axial", "transverse"],
  "cooling": { "layout": "periodic", "period": 10, "gamma": 0.1, "t_cool": "doppler" },
  "background": { "kappa": 1e-4, "t_bg": "upper_bound" },
  "output": "runs/fig5",
  "seed": 1
})"},
      {"fig6", R"({
  "species": "171Yb+",
  "d0": "10 um",
  "n": 121,
  "trap": { "kind": "quartic_fit", "target_spacing": "10 um", "exclude": 10 },
  "omega_x": "2pi x 5.1 MHz",
  "directions": ["axial", "transverse"],
  "cooling": { "layout": "periodic", "period": 10, "gamma": 0.1, "t_cool": "doppler" },
  "background": { "kappa": 1e-4, "t_bg": "upper_bound" },
  "sweep": { "period_grid": [2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 24, 30, 40, 60] },
  "output": "runs/fig6",
  "seed": 1
})"},
      {"fig7", R"({
  "species": "171Yb+",
  "d0": "10 um",
  "n": 20,
  "trap": { "kind": "harmonic", "omega_z": "2pi x 34 kHz" },
  "omega_x": "2pi x 5.1 MHz",
  "directions": ["axial", "transverse"],
  "cooling": { "layout": "edge", "cool_per_side": 5, "gamma": 0.1, "t_cool": "doppler" },
  "background": { "kappa": 0 },
  "time": { "t_init": "2 doppler", "t_end": "200 t0", "raw_samples": 2000 },
  "output": "runs/fig7",
  "seed": 1
})"},
      {"fig8a", R"({
  "species": "171Yb+",
  "d0": "10 um",
  "n": 121,
  "trap": { "kind": "quartic_fit", "target_spacing": "10 um", "exclude": 10 },
  "omega_x": "2pi x 5.1 MHz",
  "directions": ["axial", "transverse"],
  "cooling": { "layout": "periodic", "period": 10, "gamma": 0.1, "t_cool": "doppler" },
  "background": { "kappa": 0 },
  "sweep": { "period_grid": [5, 10, 15, 20, 24], "relaxation": true },
  "time": { "t_init": "2 doppler" },
  "output": "runs/fig8a",
  "seed": 1
})"},
      {"fig8b", R"({
  "species": "171Yb+",
  "d0": "10 um",
  "n": 121,
  "trap": { "kind": "quartic_fit", "target_spacing": "10 um", "exclude": 15 },
  "omega_x": "2pi x 5.1 MHz",
  "directions": ["axial", "transverse"],
  "cooling": { "layout": "periodic", "period": 10, "gamma": 0.1, "t_cool": "doppler" },
  "background": { "kappa": 0 },
  "sweep": { "size_grid": [41, 61, 81, 101, 121], "relaxation": true },
  "time": { "t_init": "2 doppler" },
  "output": "runs/fig8b",
  "seed": 1
})"}};
  return presets;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : preset_table()) names.push_back(name);
  return names;
}

inline std::string preset_config_text(const std::string& name) {
  // The relaxation-scaling study has two panels with different fit windows;
  // bare "fig8" means the period panel.
  const std::string wanted = (name == "fig8") ? "fig8a" : name;
  for (const auto& [preset, text] : preset_table())
    if (preset == wanted) return text;
  std::string known;
  for (const auto& [preset, text] : preset_table()) {
    if (!known.empty()) known += ", ";
    known += preset;
  }
  throw config_error("config: unknown preset \"" + name +
                     "\" (available: " + known + ")");
}

}  // namespace coolchain
