#include "uowsn/config.hpp"

#include "uowsn/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <map>

namespace uowsn {

namespace {

namespace pt = boost::property_tree;

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& raw) {
  const std::string s = trimmed(raw);
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("'" + s + "' is not a number");
  return v;
}

template <typename Int>
Int to_int(const std::string& raw) {
  const std::string s = trimmed(raw);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("'" + s + "' is not an integer");
  return v;
}

bool to_bool(const std::string& raw) {
  const std::string s = trimmed(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("'" + s + "' is not a boolean");
}

Vec3 to_extent(const std::string& raw) {
  std::vector<double> parts;
  std::string item;
  for (char ch : raw + ",") {
    if (ch == ',') {
      parts.push_back(to_double(item));
      item.clear();
    } else {
      item += ch;
    }
  }
  if (parts.size() == 1) return Vec3::Constant(parts[0]);
  if (parts.size() == 3) return Vec3(parts[0], parts[1], parts[2]);
  throw ConfigError("region must be one side length or x,y,z");
}

using Setter = std::function<void(AppConfig&, const std::string&)>;
using Section = std::map<std::string, Setter>;

std::map<std::string, Section> schema() {
  std::map<std::string, Section> s;
  auto& water = s["water"];
  water["preset"] = [](AppConfig& c, const std::string& v) {
    const WaterPreset p = parse_water_preset(trimmed(v));
    auto& w = c.setup.channel.water;
    if (p == WaterPreset::Custom) {
      w.preset = p;
    } else {
      const auto keep = w.preset_override;
      w = WaterModel::from_preset(p);
      if (keep) w.preset_override = keep;
    }
  };
  auto override_part = [](bool absorption) {
    return [absorption](AppConfig& c, const std::string& v) {
      auto& w = c.setup.channel.water;
      PresetCoefficients pc = w.preset_override.value_or(PresetCoefficients{0.0, 0.0});
      (absorption ? pc.absorption : pc.scattering) = to_double(v);
      w.preset_override = pc;
    };
  };
  water["absorption"] = override_part(true);
  water["scattering"] = override_part(false);
  water["lambda_nm"] = [](AppConfig& c, const std::string& v) { c.setup.channel.water.lambda_nm = to_double(v); };
  water["c_c"] = [](AppConfig& c, const std::string& v) { c.setup.channel.water.c_c = to_double(v); };
  water["c_e"] = [](AppConfig& c, const std::string& v) { c.setup.channel.water.c_e = to_double(v); };
  water["c_o"] = [](AppConfig& c, const std::string& v) { c.setup.channel.water.c_o = to_double(v); };
  water["alpha_f"] = [](AppConfig& c, const std::string& v) { c.setup.channel.water.alpha_f = to_double(v); };
  water["alpha_h"] = [](AppConfig& c, const std::string& v) { c.setup.channel.water.alpha_h = to_double(v); };

  auto& link = s["link"];
  link["p_t"] = [](AppConfig& c, const std::string& v) { c.setup.channel.link.p_t = to_double(v); };
  link["rho_t"] = [](AppConfig& c, const std::string& v) { c.setup.channel.link.rho_t = to_double(v); };
  link["rho_r"] = [](AppConfig& c, const std::string& v) { c.setup.channel.link.rho_r = to_double(v); };
  link["theta_0"] = [](AppConfig& c, const std::string& v) { c.setup.channel.link.theta_0 = to_double(v); };
  link["b_r"] = [](AppConfig& c, const std::string& v) { c.setup.channel.link.b_r = to_double(v); };
  link["theta"] = [](AppConfig& c, const std::string& v) { c.setup.channel.link.theta = to_double(v); };

  auto& noise = s["noise"];
  noise["sigma"] = [](AppConfig& c, const std::string& v) { c.setup.noise.sigma = to_double(v); };
  noise["outlier_prob"] = [](AppConfig& c, const std::string& v) { c.setup.noise.outlier_prob = to_double(v); };
  noise["outlier_scale"] = [](AppConfig& c, const std::string& v) {
    if (trimmed(v) == "auto") c.setup.noise.outlier_scale.reset();
    else c.setup.noise.outlier_scale = to_double(v);
  };

  auto& solver = s["solver"];
  solver["lambda1"] = [](AppConfig& c, const std::string& v) {
    const std::string t = trimmed(v);
    if (t == "auto") c.setup.solver.lambda1.reset();
    else if (t == "off") c.setup.solver.lambda1 = SolverConfig::kDisabled;
    else c.setup.solver.lambda1 = to_double(t);
  };
  solver["outlier_rule"] = [](AppConfig& c, const std::string& v) { c.setup.solver.outlier_rule = parse_outlier_rule(trimmed(v)); };
  solver["lambda2"] = [](AppConfig& c, const std::string& v) { c.setup.solver.lambda2 = to_double(v); };
  solver["c"] = [](AppConfig& c, const std::string& v) { c.setup.solver.c = to_double(v); };
  solver["rho"] = [](AppConfig& c, const std::string& v) { c.setup.solver.rho = to_double(v); };
  solver["rho_scale"] = [](AppConfig& c, const std::string& v) { c.setup.solver.rho_scale = parse_threshold_scale(trimmed(v)); };
  solver["loss"] = [](AppConfig& c, const std::string& v) { c.setup.solver.loss = parse_loss(trimmed(v)); };
  solver["tol"] = [](AppConfig& c, const std::string& v) { c.setup.solver.tol = to_double(v); };
  solver["max_iters"] = [](AppConfig& c, const std::string& v) { c.setup.solver.max_iters = to_int<int>(v); };
  solver["monotone"] = [](AppConfig& c, const std::string& v) { c.setup.solver.monotone = to_bool(v); };
  solver["rescale"] = [](AppConfig& c, const std::string& v) { c.setup.solver.rescale = to_bool(v); };
  solver["warmup_iters"] = [](AppConfig& c, const std::string& v) { c.setup.solver.warmup_iters = to_int<int>(v); };
  solver["warmup_tol"] = [](AppConfig& c, const std::string& v) { c.setup.solver.warmup_tol = to_double(v); };
  solver["restarts"] = [](AppConfig& c, const std::string& v) { c.setup.solver.restarts = to_int<int>(v); };
  solver["mds_start"] = [](AppConfig& c, const std::string& v) { c.setup.solver.mds_start = to_bool(v); };
  solver["ls_seeded_start"] = [](AppConfig& c, const std::string& v) { c.setup.solver.ls_seeded_start = to_bool(v); };
  solver["relocation_rounds"] = [](AppConfig& c, const std::string& v) { c.setup.solver.relocation_rounds = to_int<int>(v); };
  solver["relocation_starts"] = [](AppConfig& c, const std::string& v) { c.setup.solver.relocation_starts = to_int<int>(v); };

  auto& placement = s["placement"];
  placement["mu"] = [](AppConfig& c, const std::string& v) { c.setup.placement.mu = to_double(v); };
  placement["delta"] = [](AppConfig& c, const std::string& v) { c.setup.placement.delta = to_double(v); };
  placement["c1"] = [](AppConfig& c, const std::string& v) { c.setup.placement.c1 = to_double(v); };
  placement["h"] = [](AppConfig& c, const std::string& v) { c.setup.placement.h = to_double(v); };
  placement["max_outer"] = [](AppConfig& c, const std::string& v) { c.setup.placement.max_outer = to_int<int>(v); };
  placement["max_backtracks"] = [](AppConfig& c, const std::string& v) { c.setup.placement.max_backtracks = to_int<int>(v); };
  placement["min_depth"] = [](AppConfig& c, const std::string& v) { c.setup.placement.min_depth = to_double(v); };
  placement["max_depth"] = [](AppConfig& c, const std::string& v) { c.setup.placement.max_depth = to_double(v); };
  placement["min_degree"] = [](AppConfig& c, const std::string& v) { c.setup.options.placement_min_degree = to_int<int>(v); };

  auto& sim = s["sim"];
  sim["m"] = [](AppConfig& c, const std::string& v) { c.setup.m = to_int<int>(v); };
  sim["n"] = [](AppConfig& c, const std::string& v) { c.setup.n = to_int<int>(v); };
  sim["o"] = [](AppConfig& c, const std::string& v) { c.setup.o = to_int<int>(v); };
  sim["region"] = [](AppConfig& c, const std::string& v) { c.setup.region.extent = to_extent(v); };
  sim["range"] = [](AppConfig& c, const std::string& v) { c.setup.range = to_double(v); };
  sim["seed"] = [](AppConfig& c, const std::string& v) { c.setup.seed = to_int<std::uint64_t>(v); };
  sim["runs"] = [](AppConfig& c, const std::string& v) { c.runs = to_int<int>(v); };
  sim["case"] = [](AppConfig& c, const std::string& v) { c.case_id = to_int<int>(v); };
  sim["seabed_band"] = [](AppConfig& c, const std::string& v) { c.setup.generation.seabed_band = to_double(v); };
  sim["random_anchor_depths"] = [](AppConfig& c, const std::string& v) { c.setup.generation.random_anchor_depths = to_bool(v); };
  sim["min_degree"] = [](AppConfig& c, const std::string& v) { c.setup.generation.min_degree = to_int<int>(v); };
  sim["known_anchor_ranges"] = [](AppConfig& c, const std::string& v) { c.setup.options.known_anchor_ranges = to_bool(v); };
  return s;
}

}  // namespace

void AppConfig::validate() const {
  try {
    setup.channel.water.validate();
    setup.channel.link.validate();
    setup.noise.validate();
    setup.solver.validate();
    setup.placement.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (setup.m < 0 || setup.n < 0 || setup.o < 0)
    throw ConfigError("sim: node counts must be nonnegative");
  if (!(setup.region.extent.array() > 0.0).all())
    throw ConfigError("sim: region must be positive");
  if (!(setup.range >= 0.0)) throw ConfigError("sim: range must be nonnegative");
  if (runs < 1) throw ConfigError("sim: runs must be at least 1");
  if (case_id < 1 || case_id > 4) throw ConfigError("sim: case must be 1, 2, 3 or 4");
  if (!(setup.generation.seabed_band > 0.0 && setup.generation.seabed_band <= 1.0))
    throw ConfigError("sim: seabed_band must lie in (0, 1]");
  if (setup.generation.min_degree < 0)
    throw ConfigError("sim: min_degree must be nonnegative");
  if (setup.options.placement_min_degree < 0)
    throw ConfigError("placement: min_degree must be nonnegative");
}

AppConfig parse_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  const auto sections = schema();
  AppConfig c;
  for (const auto& [name, body] : tree) {
    const auto sec = sections.find(name);
    if (sec == sections.end()) {
      if (body.empty())
        throw ConfigError(source + ": key '" + name + "' outside any section");
      throw ConfigError(source + ": unknown section [" + name + "]");
    }
    if (name == "water") c.water_given = true;
    // preset first so explicit coefficients in the same section win
    if (auto p = body.find("preset"); p != body.not_found()) {
      try {
        sec->second.at("preset")(c, p->second.data());
      } catch (const Error& e) {
        throw ConfigError(source + ": [water] preset: " + e.what());
      }
    }
    for (const auto& [key, value] : body) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end())
        throw ConfigError(source + ": unknown key '" + key + "' in [" + name + "]");
      if (name == "water" && key == "preset") continue;
      try {
        setter->second(c, value.data());
      } catch (const Error& e) {
        throw ConfigError(source + ": [" + name + "] " + key + ": " + e.what());
      }
    }
  }
  c.validate();
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'", path);
  return parse_config(in, path.string());
}

}  // namespace uowsn
