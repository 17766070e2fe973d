#include "uowsn/config.hpp"
#include "uowsn/io.hpp"
#include "uowsn/sim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

using namespace uowsn;

namespace {

struct Failure {
  std::string stage;
  std::string message;
  int code;
};

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const IoError& e) {
    throw Failure{name, e.what(), 2};
  } catch (const ConfigError& e) {
    throw Failure{name, e.what(), 2};
  } catch (const Error& e) {
    throw Failure{name, e.what(), 1};
  } catch (const std::exception& e) {
    throw Failure{name, e.what(), 1};
  }
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_out) {
  c.out = default_out;
  cmd->add_option("--config", c.config, "INI configuration file");
  cmd->add_option("--seed", c.seed, "master seed (overrides [sim] seed)");
  cmd->add_option("--out", c.out, "output path")->capture_default_str();
}

AppConfig configure(const Common& c) {
  AppConfig cfg = stage("config", [&] {
    return c.config.empty() ? AppConfig{} : load_config(c.config);
  });
  if (c.seed) cfg.setup.seed = *c.seed;
  return cfg;
}

void revalidate(const AppConfig& cfg) {
  stage("config", [&] { cfg.validate(); });
}

std::string sig(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// channel-curve ------------------------------------------------------------

struct CurveArgs {
  double min_distance = 1.0;
  double max_distance = 100.0;
  int points = 100;
};

void cmd_channel_curve(const Common& common, const CurveArgs& args) {
  const AppConfig cfg = configure(common);
  if (!(args.min_distance > 0.0 && args.max_distance > args.min_distance) ||
      args.points < 2)
    throw Failure{"channel-curve", "need 0 < min-distance < max-distance and points >= 2", 2};

  std::vector<std::pair<std::string, WaterModel>> waters;
  if (cfg.water_given) {
    waters.emplace_back(std::string(to_string(cfg.setup.channel.water.preset)),
                        cfg.setup.channel.water);
  } else {
    for (auto p : {WaterPreset::PureSea, WaterPreset::ClearOcean,
                   WaterPreset::Coastal, WaterPreset::Harbor})
      waters.emplace_back(std::string(to_string(p)), WaterModel::from_preset(p));
  }

  const std::string csv = stage("channel", [&] {
    std::ostringstream out;
    out << "distance_m,power_dBW,water_preset\n" << std::setprecision(17);
    for (const auto& [label, water] : waters) {
      const double e = extinction_coefficient(water);
      for (int k = 0; k < args.points; ++k) {
        const double d = args.min_distance + (args.max_distance - args.min_distance) *
                                                 k / (args.points - 1);
        out << d << ',' << to_dbw(received_power(cfg.setup.channel.link, e, d))
            << ',' << label << '\n';
      }
    }
    return out.str();
  });
  stage("write", [&] { write_text_file(common.out, csv); });
}

// simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string obs_out = "observations.json";
  std::optional<double> sigma;
  std::optional<double> outliers;
};

void cmd_simulate(const Common& common, const SimulateArgs& args) {
  AppConfig cfg = configure(common);
  if (args.sigma) cfg.setup.noise.sigma = *args.sigma;
  if (args.outliers) cfg.setup.noise.outlier_prob = *args.outliers;
  revalidate(cfg);
  const auto& s = cfg.setup;

  const Scenario scenario = stage("generate", [&] {
    return generate_scenario(s.m, s.n, s.o, s.region, s.range, s.seed, s.generation);
  });
  const ObservedDistances obs = stage("ranging", [&] {
    RangingNoise noise = s.noise;
    noise.seed = derive_seed(s.seed, 0x7a11);
    ObservedDistances o = estimate_pairwise(scenario, s.channel.water, s.channel.link, noise);
    if (s.options.known_anchor_ranges) add_anchor_distances(o, scenario);
    return o;
  });
  stage("write", [&] {
    write_json_file(common.out, to_json(scenario));
    write_json_file(args.obs_out, to_json(obs));
  });
}

// localize -----------------------------------------------------------------

struct LocalizeArgs {
  std::string scenario;
  std::string obs;
  std::optional<double> lambda2;
  bool no_outliers = false;
};

void cmd_localize(const Common& common, const LocalizeArgs& args) {
  AppConfig cfg = configure(common);
  if (args.lambda2) cfg.setup.solver.lambda2 = *args.lambda2;
  if (args.no_outliers) cfg.setup.solver.lambda1 = SolverConfig::kDisabled;
  revalidate(cfg);

  const Scenario scenario =
      stage("load", [&] { return scenario_from_json(read_json_file(args.scenario)); });
  const ObservedDistances obs =
      stage("load", [&] { return observations_from_json(read_json_file(args.obs)); });
  if (obs.size() != scenario.size())
    throw Failure{"load", "observations have " + std::to_string(obs.size()) +
                              " nodes, scenario has " + std::to_string(scenario.size()),
                  1};

  SolverConfig solver = cfg.setup.solver;
  solver.seed = derive_seed(cfg.setup.seed, 0x501e);
  solver.init_extent = scenario.region.extent;
  const SolveResult solved = stage("solve", [&] { return solve(obs, solver); });
  const AnchorAlignment aligned = stage("align", [&] {
    return align_to_anchors(solved.positions, scenario.anchor_indices(), scenario.anchors());
  });

  const auto unknown = scenario.unknown_count();
  Json result = to_json(solved);
  result["relative_positions"] = result["positions"];
  result["positions"] = positions_to_json(aligned.global);
  result["transform"] = to_json(aligned.transform);
  result["mirrored"] = aligned.mirrored;
  result["anchor_residual"] = aligned.anchor_residual;
  result["rmse"] = rmse(scenario.unknowns(), aligned.global.topRows(unknown));
  stage("write", [&] { write_json_file(common.out, result); });
  std::cout << "rmse " << sig(result["rmse"].get<double>()) << '\n';
}

// place-anchors ------------------------------------------------------------

struct PlaceArgs {
  std::string scenario;
  std::string trace_out = "placement_trace.csv";
};

void cmd_place_anchors(const Common& common, const PlaceArgs& args) {
  const AppConfig cfg = configure(common);
  const Scenario scenario =
      stage("load", [&] { return scenario_from_json(read_json_file(args.scenario)); });
  const PlacementResult placed = stage("place", [&] {
    return optimize_anchor_depths(scenario, cfg.setup.noise.sigma, cfg.setup.placement,
                                  cfg.setup.options.placement_min_degree);
  });
  Json out = {{"indices", scenario.anchor_indices()},
              {"anchors", positions_to_json(placed.anchors)},
              {"objective_initial", placed.trace.front().objective},
              {"objective_final", placed.trace.back().objective},
              {"iterations", placed.trace.back().iter}};
  std::ostringstream trace;
  write_trace_csv(trace, placed.trace);
  stage("write", [&] {
    write_json_file(common.out, out);
    write_text_file(args.trace_out, trace.str());
  });
}

// montecarlo ---------------------------------------------------------------

struct MonteCarloArgs {
  std::string sweep;
  std::optional<int> runs;
  std::optional<int> case_id;
};

void cmd_montecarlo(const Common& common, const MonteCarloArgs& args) {
  AppConfig cfg = configure(common);
  if (args.runs) cfg.runs = *args.runs;
  if (args.case_id) cfg.case_id = *args.case_id;
  revalidate(cfg);
  SweepSpec spec;
  try {
    spec = SweepSpec::parse(args.sweep);
  } catch (const Error& e) {
    throw Failure{"sweep", e.what(), 2};
  }
  spec.case_id = cfg.case_id;
  const auto rows = stage("montecarlo", [&] { return monte_carlo(cfg.setup, spec, cfg.runs); });
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  stage("write", [&] { write_text_file(common.out, csv.str()); });
}

// rmse ---------------------------------------------------------------------

struct RmseArgs {
  std::string truth;
  std::string estimate;
  bool write = false;
};

void cmd_rmse(const Common& common, const RmseArgs& args) {
  const Scenario truth =
      stage("load", [&] { return scenario_from_json(read_json_file(args.truth)); });
  const Positions estimate = stage("load", [&] {
    const Json j = read_json_file(args.estimate);
    if (!j.contains("positions"))
      throw FormatError("'" + args.estimate + "' has no positions");
    return positions_from_json(j.at("positions"));
  });
  const int unknown = truth.unknown_count();
  if (estimate.rows() != truth.size() && estimate.rows() != unknown)
    throw Failure{"rmse", "estimate has " + std::to_string(estimate.rows()) +
                              " rows, expected " + std::to_string(truth.size()) +
                              " or " + std::to_string(unknown),
                  1};
  const double value = rmse(truth.unknowns(), estimate.topRows(unknown));
  std::cout << sig(value) << '\n';
  if (args.write)
    stage("write", [&] { write_json_file(common.out, Json{{"rmse", value}}); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Underwater optical sensor network localization"};
  app.require_subcommand(1);

  Common c_curve, c_sim, c_loc, c_place, c_mc, c_rmse;
  CurveArgs curve;
  SimulateArgs simulate;
  LocalizeArgs localize;
  PlaceArgs place;
  MonteCarloArgs mc;
  RmseArgs rm;

  auto* cmd_curve = app.add_subcommand("channel-curve", "received power vs distance per water type");
  add_common(cmd_curve, c_curve, "channel_curve.csv");
  cmd_curve->add_option("--min-distance", curve.min_distance, "m")->capture_default_str();
  cmd_curve->add_option("--max-distance", curve.max_distance, "m")->capture_default_str();
  cmd_curve->add_option("--points", curve.points)->capture_default_str();

  auto* cmd_sim = app.add_subcommand("simulate", "random scenario and its observed distances");
  add_common(cmd_sim, c_sim, "scenario.json");
  cmd_sim->add_option("--obs-out", simulate.obs_out, "observations output")->capture_default_str();
  cmd_sim->add_option("--sigma", simulate.sigma, "ranging noise std (m)");
  cmd_sim->add_option("--outliers", simulate.outliers, "outlier probability per pair");

  auto* cmd_loc = app.add_subcommand("localize", "solve and align to the anchors");
  add_common(cmd_loc, c_loc, "result.json");
  cmd_loc->add_option("--scenario", localize.scenario)->required();
  cmd_loc->add_option("--obs", localize.obs)->required();
  cmd_loc->add_option("--lambda2", localize.lambda2);
  cmd_loc->add_flag("--no-outliers", localize.no_outliers, "disable outlier estimation");

  auto* cmd_place = app.add_subcommand("place-anchors", "optimize anchor depths");
  add_common(cmd_place, c_place, "anchors.json");
  cmd_place->add_option("--scenario", place.scenario)->required();
  cmd_place->add_option("--trace-out", place.trace_out)->capture_default_str();

  auto* cmd_mc = app.add_subcommand("montecarlo", "Monte Carlo sweep to CSV");
  add_common(cmd_mc, c_mc, "sweep.csv");
  cmd_mc->add_option("--sweep", mc.sweep, "name:start:stop:count, name in sigma|outliers|lambda2")->required();
  cmd_mc->add_option("--runs", mc.runs);
  cmd_mc->add_option("--case", mc.case_id, "1..4");

  auto* cmd_rm = app.add_subcommand("rmse", "RMSE of the unknown nodes");
  add_common(cmd_rm, c_rmse, "rmse.json");
  cmd_rm->add_option("--truth", rm.truth, "scenario JSON")->required();
  cmd_rm->add_option("--estimate", rm.estimate, "JSON with positions")->required();
  cmd_rm->callback([&] { rm.write = cmd_rm->count("--out") > 0; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cmd_curve) cmd_channel_curve(c_curve, curve);
    else if (*cmd_sim) cmd_simulate(c_sim, simulate);
    else if (*cmd_loc) cmd_localize(c_loc, localize);
    else if (*cmd_place) cmd_place_anchors(c_place, place);
    else if (*cmd_mc) cmd_montecarlo(c_mc, mc);
    else if (*cmd_rm) cmd_rmse(c_rmse, rm);
  } catch (const Failure& f) {
    std::cerr << "error [" << f.stage << "]: " << f.message << '\n';
    return f.code;
  }
  return 0;
}
