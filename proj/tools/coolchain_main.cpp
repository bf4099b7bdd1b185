// coolchain command line: steady states, time evolution and parameter sweeps
// of sympathetically cooled ion chains, driven by JSON run configurations.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical or physics
// failure, 4 stochastic-oracle mismatch.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "coolchain/chain.hpp"
#include "coolchain/config.hpp"
#include "coolchain/csv.hpp"
#include "coolchain/dynamics.hpp"
#include "coolchain/metrics.hpp"
#include "coolchain/oracle.hpp"
#include "coolchain/relaxation.hpp"
#include "coolchain/system.hpp"
#include "coolchain/version.hpp"

namespace {

using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_oracle = 4;

struct CliOptions {
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

void add_common_options(CLI::App* cmd, CliOptions& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file");
  cmd->add_option("--preset", opts.preset,
                  "bundled scenario name (fig1..fig8b)");
  cmd->add_option("--out", opts.out_dir, "output directory override");
  cmd->add_option("--seed", opts.seed, "seed override");
  cmd->add_option("--threads", opts.threads,
                  "cap the dense-algebra thread pool (best effort)");
}

coolchain::RunConfig load_config(const CliOptions& opts) {
  if (!opts.config_path.empty() && !opts.preset.empty())
    throw coolchain::config_error(
        "config: give either --config or --preset, not both");
  coolchain::RunConfig cfg;
  if (!opts.config_path.empty())
    cfg = coolchain::load_run_config(opts.config_path);
  else if (!opts.preset.empty())
    cfg = coolchain::parse_run_config_text(
        coolchain::preset_config_text(opts.preset));
  else
    throw coolchain::config_error("config: --config or --preset is required");
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.threads < 0)
    throw coolchain::config_error("config: --threads must be >= 0");
  if (opts.threads > 0) Eigen::setNbThreads(opts.threads);
  return cfg;
}

// Results are assembled fully in memory and flushed in one pass, so a run
// that fails mid-way leaves no partial files behind.
struct OutputSet {
  std::string dir;
  std::vector<std::pair<std::string, std::string>> files;

  void add(const std::string& name, std::string content) {
    files.emplace_back(name, std::move(content));
  }
  void add_json(const std::string& name, const json& j) {
    add(name, j.dump(2) + "\n");
  }
  void flush() const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files) {
      const std::string path = dir + "/" + name;
      std::ofstream out(path, std::ios::binary);
      if (!out)
        throw coolchain::error("cannot write \"" + path + "\"");
      out << content;
    }
  }
};

// Resolves a quartic_fit trap into explicit coefficients; other kinds pass
// through.  The updated config is what the snapshot records.
coolchain::TrapPotential resolve_trap(coolchain::RunConfig& cfg,
                                      json* fit_info = nullptr) {
  if (cfg.trap.kind != "quartic_fit") return coolchain::trap_potential(cfg.trap);
  const coolchain::QuarticFitResult fit = coolchain::fit_quartic(
      cfg.n, cfg.trap.target_spacing, cfg.trap.exclude);
  if (fit_info) {
    (*fit_info)["alpha2"] = fit.trap.alpha2;
    (*fit_info)["alpha4"] = fit.trap.alpha4;
    (*fit_info)["mean_spacing"] = fit.mean_spacing;
    (*fit_info)["residual_rms"] = fit.residual_rms;
    (*fit_info)["evaluations"] = fit.evaluations;
  }
  cfg.trap.kind = "quartic";
  cfg.trap.alpha2 = fit.trap.alpha2;
  cfg.trap.alpha4 = fit.trap.alpha4;
  return fit.trap;
}

coolchain::ChainSystem build_system(const coolchain::RunConfig& cfg,
                                    const coolchain::TrapPotential& trap) {
  std::optional<double> omega_x;
  if (cfg.omega_x > 0) omega_x = cfg.omega_x;
  return coolchain::build_chain_system(cfg.units, trap, cfg.n, omega_x);
}

bool wants(const coolchain::RunConfig& cfg, coolchain::Direction d) {
  for (coolchain::Direction dir : cfg.directions)
    if (dir == d) return true;
  return false;
}

const char* direction_name(coolchain::Direction d) {
  return d == coolchain::Direction::Axial ? "axial" : "transverse";
}

json efficiency_json(const coolchain::EfficiencyReport& rep) {
  return json{{"max_normalized", rep.max_normalized},
              {"mean_ratio", rep.mean_ratio},
              {"worst_ratio", rep.worst_ratio},
              {"worst_ion", rep.worst_ion + 1}};
}

// Tracked ions for time evolution: the first heated ion, the ion whose
// steady state is worst, and the chain centre (deduplicated, sorted).
std::vector<int> tracked_ions(const coolchain::SteadyScenario& sc, int n) {
  std::vector<int> ions;
  auto push = [&ions](int i) {
    for (int j : ions)
      if (j == i) return;
    ions.push_back(i);
  };
  if (!sc.baths.heated.empty()) {
    push(sc.baths.heated.front());
    int worst = sc.baths.heated.front();
    for (int i : sc.baths.heated)
      if (sc.profile.xx[i] > sc.profile.xx[worst]) worst = i;
    push(worst);
  }
  push(coolchain::middle_ion(n));
  std::sort(ions.begin(), ions.end());
  return ions;
}

int cmd_equilibrium(const CliOptions& opts) {
  coolchain::RunConfig cfg = load_config(opts);
  json fit_info;
  const coolchain::TrapPotential trap = resolve_trap(cfg, &fit_info);
  const coolchain::ChainSystem sys = build_system(cfg, trap);

  OutputSet out;
  out.dir = cfg.out_dir;
  {
    std::ostringstream os;
    coolchain::write_positions_csv(os, sys.eq);
    out.add("positions.csv", os.str());
  }
  {
    std::ostringstream os;
    coolchain::write_modes_csv(os, sys.axial_modes);
    out.add("modes_axial.csv", os.str());
  }
  if (sys.transverse_modes) {
    std::ostringstream os;
    coolchain::write_modes_csv(os, *sys.transverse_modes);
    out.add("modes_transverse.csv", os.str());
  }

  json summary;
  summary["n"] = cfg.n;
  summary["trap"] = coolchain::to_snapshot_json(cfg)["config"]["trap"];
  if (!fit_info.is_null()) summary["quartic_fit"] = fit_info;
  summary["newton_iterations"] = sys.eq.newton_iterations;
  summary["gradient_norm"] = sys.eq.gradient_norm;
  summary["extent"] = sys.eq.positions.back() - sys.eq.positions.front();
  const std::vector<double> spacings = coolchain::chain_spacings(sys.eq);
  if (!spacings.empty()) {
    summary["min_spacing"] =
        *std::min_element(spacings.begin(), spacings.end());
    summary["max_spacing"] =
        *std::max_element(spacings.begin(), spacings.end());
  }
  summary["axial_omega_min"] = sys.axial_modes.omega(0);
  summary["axial_omega_max"] = sys.axial_modes.omega(cfg.n - 1);
  if (sys.transverse_modes) {
    summary["transverse_omega_min"] = sys.transverse_modes->omega(0);
    summary["transverse_omega_max"] = sys.transverse_modes->omega(cfg.n - 1);
  }
  out.add_json("summary.json", summary);
  out.add_json("snapshot.json", coolchain::to_snapshot_json(cfg));
  out.flush();
  return exit_ok;
}

int cmd_steady(const CliOptions& opts) {
  coolchain::RunConfig cfg = load_config(opts);
  const coolchain::TrapPotential trap = resolve_trap(cfg);
  const coolchain::ChainSystem sys = build_system(cfg, trap);
  const coolchain::ScenarioSettings settings{cfg.cooling, cfg.kappa, cfg.t_bg};

  std::optional<coolchain::MomentProfile> axial, transverse, axial_ideal,
      transverse_ideal;
  json summary;
  for (coolchain::Direction d : cfg.directions) {
    const coolchain::SteadyScenario sc =
        coolchain::scenario_steady(sys, d, settings);
    const coolchain::MomentProfile ideal =
        coolchain::scenario_ideal(sys, d, cfg.cooling.t_cool);
    json dir_summary;
    dir_summary["t_bg_used"] = sc.t_bg_used;
    if (!sc.baths.heated.empty())
      dir_summary["efficiency"] = efficiency_json(
          coolchain::cooling_efficiency(sc.profile, ideal, sc.baths.heated));
    summary[direction_name(d)] = dir_summary;
    if (d == coolchain::Direction::Axial) {
      axial = sc.profile;
      axial_ideal = ideal;
    } else {
      transverse = sc.profile;
      transverse_ideal = ideal;
    }
  }

  OutputSet out;
  out.dir = cfg.out_dir;
  {
    std::ostringstream os;
    coolchain::write_profile_csv(
        os, sys.eq.positions, transverse ? &*transverse : nullptr,
        axial ? &*axial : nullptr,
        transverse_ideal ? &*transverse_ideal : nullptr,
        axial_ideal ? &*axial_ideal : nullptr);
    out.add("profile.csv", os.str());
  }
  out.add_json("summary.json", summary);
  out.add_json("snapshot.json", coolchain::to_snapshot_json(cfg));
  out.flush();
  return exit_ok;
}

int cmd_evolve(const CliOptions& opts) {
  coolchain::RunConfig cfg = load_config(opts);
  const coolchain::TrapPotential trap = resolve_trap(cfg);
  const coolchain::ChainSystem sys = build_system(cfg, trap);
  const coolchain::ScenarioSettings settings{cfg.cooling, cfg.kappa, cfg.t_bg};
  if (cfg.time.t_end == 0)
    cfg.time.t_end = 10 * cfg.time.scan.window;

  OutputSet out;
  out.dir = cfg.out_dir;
  json relaxation;
  for (coolchain::Direction d : cfg.directions) {
    const coolchain::SteadyScenario sc =
        coolchain::scenario_steady(sys, d, settings);
    const coolchain::DriftSpectrum spec =
        coolchain::spectral_decomposition(sys.matrix(d), sc.baths.gamma);
    const double t_init =
        cfg.time.t_init > 0 ? cfg.time.t_init : cfg.cooling.t_cool;
    const coolchain::MomentProfile init = coolchain::thermal_equilibrium_profile(
        sys.modes(d), t_init, sys.units.alpha);
    const coolchain::SecondMomentKernel kernel(spec, sc.theta, init,
                                               sys.units.alpha);
    const std::vector<int> ions = tracked_ions(sc, cfg.n);

    std::vector<double> times(cfg.time.raw_samples);
    for (int j = 0; j < cfg.time.raw_samples; ++j)
      times[j] = cfg.time.t_end * j / (cfg.time.raw_samples - 1.0);
    const coolchain::TimeSeries raw =
        coolchain::evolve_second_moments(spec, sc.theta, init, times, ions,
                                         sys.units.alpha);
    const coolchain::RelaxationScanResult scan =
        coolchain::relaxation_scan(kernel, sc.profile, ions, cfg.time.scan);

    const std::string tag = direction_name(d);
    {
      std::ostringstream os;
      coolchain::write_series_csv(os, raw);
      out.add("series_raw_" + tag + ".csv", os.str());
    }
    {
      std::ostringstream os;
      coolchain::write_coarse_csv(os, scan.sampled);
      out.add("series_coarse_" + tag + ".csv", os.str());
    }
    json dir_info;
    dir_info["tau"] = scan.tau;
    dir_info["tau_over_t0"] = scan.tau / (2.0 * coolchain::constants::pi);
    json per_ion = json::object();
    for (std::size_t j = 0; j < scan.ions.size(); ++j) {
      json ion_info;
      ion_info["tau"] = scan.tau_per_ion[j];
      ion_info["tau_over_t0"] =
          scan.tau_per_ion[j] / (2.0 * coolchain::constants::pi);
      ion_info["asymptote"] = sc.profile.delta_x(scan.ions[j]);
      per_ion[std::to_string(scan.ions[j] + 1)] = ion_info;
    }
    dir_info["per_ion"] = per_ion;
    dir_info["criterion"] = scan.criterion;
    dir_info["window_over_t0"] =
        cfg.time.scan.window / (2.0 * coolchain::constants::pi);
    relaxation[tag] = dir_info;
  }
  out.add_json("relaxation.json", relaxation);
  out.add_json("snapshot.json", coolchain::to_snapshot_json(cfg));
  out.flush();
  return exit_ok;
}

int cmd_sweep(const CliOptions& opts) {
  coolchain::RunConfig cfg = load_config(opts);
  const int grids = (!cfg.sweep.gamma_grid.empty() ? 1 : 0) +
                    (!cfg.sweep.period_grid.empty() ? 1 : 0) +
                    (!cfg.sweep.size_grid.empty() ? 1 : 0) +
                    (!cfg.sweep.edge_grid.empty() ? 1 : 0);
  if (grids != 1)
    throw coolchain::config_error(
        "config: sweep needs exactly one non-empty grid (gamma_grid | "
        "period_grid | size_grid | edge_grid)");

  const coolchain::ScenarioSettings settings{cfg.cooling, cfg.kappa, cfg.t_bg};
  coolchain::SweepResult result;

  if (!cfg.sweep.size_grid.empty()) {
    // Each size gets its own chain; quartic_fit traps are refitted per N.
    const coolchain::TrapConfig trap_cfg = cfg.trap;
    const coolchain::RunConfig& ccfg = cfg;
    auto builder = [&trap_cfg, &ccfg](int n) {
      coolchain::TrapPotential trap =
          trap_cfg.kind == "quartic_fit"
              ? coolchain::TrapPotential(
                    coolchain::fit_quartic(n, trap_cfg.target_spacing,
                                           trap_cfg.exclude)
                        .trap)
              : coolchain::trap_potential(trap_cfg);
      std::optional<double> omega_x;
      if (ccfg.omega_x > 0) omega_x = ccfg.omega_x;
      return coolchain::build_chain_system(ccfg.units, trap, n, omega_x);
    };
    coolchain::SizeSweepOptions size_opts;
    size_opts.scan = cfg.time.scan;
    size_opts.directions = cfg.directions;
    size_opts.t_init = cfg.time.t_init;
    result = coolchain::sweep_size(builder, cfg.sweep.size_grid, settings,
                                   size_opts);
  } else {
    const coolchain::TrapPotential trap = resolve_trap(cfg);
    const coolchain::ChainSystem sys = build_system(cfg, trap);
    if (!cfg.sweep.gamma_grid.empty()) {
      result = coolchain::sweep_gamma(sys, cfg.directions, settings,
                                      cfg.sweep.gamma_grid);
    } else if (!cfg.sweep.period_grid.empty()) {
      coolchain::PeriodSweepOptions period_opts;
      period_opts.relaxation = cfg.sweep.relaxation;
      period_opts.scan = cfg.time.scan;
      period_opts.t_init = cfg.time.t_init;
      result = coolchain::sweep_period(sys, cfg.directions, settings,
                                       cfg.sweep.period_grid, period_opts);
    } else {
      result = coolchain::sweep_edge(sys, cfg.directions, settings,
                                     cfg.sweep.edge_grid);
    }
  }

  OutputSet out;
  out.dir = cfg.out_dir;
  {
    std::ostringstream os;
    coolchain::write_sweep_csv(os, result);
    out.add("sweep.csv", os.str());
  }
  json points = json::array();
  for (const coolchain::SweepPoint& pt : result.points) {
    json p;
    p["value"] = pt.value;
    p["skipped"] = pt.skipped;
    if (!pt.note.empty()) p["note"] = pt.note;
    if (!pt.skipped && pt.has_axial) p["axial"] = efficiency_json(pt.axial);
    if (!pt.skipped && pt.has_transverse)
      p["transverse"] = efficiency_json(pt.transverse);
    if (!pt.skipped && pt.has_tau_axial)
      p["tau_axial_over_t0"] = pt.tau_axial / (2.0 * coolchain::constants::pi);
    if (!pt.skipped && pt.has_tau_transverse)
      p["tau_transverse_over_t0"] =
          pt.tau_transverse / (2.0 * coolchain::constants::pi);
    points.push_back(std::move(p));
  }
  json summary;
  summary["axis"] = result.axis;
  summary["points"] = points;
  summary["snapshot"] = coolchain::to_snapshot_json(cfg);
  out.add_json("sweep.json", summary);
  out.add_json("snapshot.json", coolchain::to_snapshot_json(cfg));
  out.flush();
  return exit_ok;
}

int cmd_oracle(const CliOptions& opts) {
  coolchain::RunConfig cfg = load_config(opts);
  if (cfg.kappa > 0 && cfg.t_bg == 0)
    throw coolchain::config_error(
        "config: the oracle needs a fixed background.t_bg (the upper-bound "
        "policy has no single stochastic realization)");
  const coolchain::TrapPotential trap = resolve_trap(cfg);
  const coolchain::ChainSystem sys = build_system(cfg, trap);
  const coolchain::Direction d = cfg.directions.front();

  const coolchain::BathAssignment baths =
      coolchain::assign_baths(cfg.cooling, cfg.n, cfg.kappa, cfg.t_bg);
  const std::vector<double> theta =
      coolchain::noise_strengths(sys.modes(d), baths);
  const coolchain::DriftSpectrum spec =
      coolchain::spectral_decomposition(sys.matrix(d), baths.gamma);
  const coolchain::MomentProfile expected =
      coolchain::steady_state(spec, theta, sys.units.alpha);

  coolchain::LangevinConfig lc = cfg.oracle.langevin;
  lc.seed = cfg.seed;
  const coolchain::EnsembleMoments mc = coolchain::run_langevin_ensemble(
      sys.matrix(d), baths.gamma, theta, lc, sys.units.alpha);
  const coolchain::OracleComparison cmp =
      coolchain::compare_with_closed_form(mc, expected, cfg.oracle.z_threshold);

  json report;
  report["direction"] = direction_name(d);
  report["pass"] = cmp.pass;
  report["max_abs_z"] = cmp.max_abs_z;
  report["z_threshold"] = cmp.z_threshold;
  report["energy_balance_z"] = cmp.energy_balance_z;
  report["z_xx"] = cmp.z_xx;
  report["z_pp"] = cmp.z_pp;
  report["trajectories"] = mc.n_traj;
  report["samples_per_trajectory"] = mc.samples_per_traj;
  report["snapshot"] = coolchain::to_snapshot_json(cfg);

  OutputSet out;
  out.dir = cfg.out_dir;
  out.add_json("oracle.json", report);
  out.add_json("snapshot.json", coolchain::to_snapshot_json(cfg));
  out.flush();
  if (!cmp.pass) {
    std::cerr << "oracle mismatch: max |z| = " << cmp.max_abs_z
              << " exceeds " << cmp.z_threshold << "\n";
    return exit_oracle;
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "coolchain: steady states and relaxation dynamics of sympathetically "
      "cooled trapped-ion chains"};
  app.set_version_flag("--version", coolchain::version_string);
  app.require_subcommand(1);

  CliOptions opts;
  CLI::App* equilibrium = app.add_subcommand(
      "equilibrium", "chain equilibrium positions and normal modes");
  CLI::App* steady = app.add_subcommand(
      "steady", "steady-state position-fluctuation profile");
  CLI::App* evolve = app.add_subcommand(
      "evolve", "second-moment time evolution and relaxation time");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "efficiency or relaxation across a parameter grid");
  CLI::App* oracle = app.add_subcommand(
      "oracle", "stochastic cross-check of the closed-form steady state");
  for (CLI::App* cmd : {equilibrium, steady, evolve, sweep, oracle})
    add_common_options(cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    if (equilibrium->parsed()) return cmd_equilibrium(opts);
    if (steady->parsed()) return cmd_steady(opts);
    if (evolve->parsed()) return cmd_evolve(opts);
    if (sweep->parsed()) return cmd_sweep(opts);
    return cmd_oracle(opts);
  } catch (const coolchain::config_error& e) {
    std::cerr << e.what() << "\n";
    return exit_config;
  } catch (const coolchain::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numeric;
  }
}
