#include "uowsn/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace uowsn {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw FormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw FormatError(std::string(what) + " must be a number");
  return j.get<double>();
}

Eigen::Index index_in(const Json& j, Eigen::Index n, const char* what) {
  if (!j.is_number_integer())
    throw FormatError(std::string(what) + " index must be an integer");
  const auto k = j.get<long long>();
  if (k < 0 || k >= n)
    throw FormatError(std::string(what) + " index " + std::to_string(k) +
                      " out of range");
  return static_cast<Eigen::Index>(k);
}

}  // namespace

Json positions_to_json(const Positions& p) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    rows.push_back({p(i, 0), p(i, 1), p(i, 2)});
  return rows;
}

Positions positions_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("positions must be an array of [x, y, z]");
  Positions p(static_cast<Eigen::Index>(j.size()), 3);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& row = j[i];
    if (!row.is_array() || row.size() != 3)
      throw FormatError("position " + std::to_string(i) + " must have 3 coordinates");
    for (int k = 0; k < 3; ++k) p(static_cast<Eigen::Index>(i), k) = number(row[k], "coordinate");
  }
  return p;
}

Json to_json(const Scenario& s) {
  Json roles = Json::array();
  for (Role r : s.roles) roles.push_back(std::string(to_string(r)));
  return {
      {"m", s.m},
      {"n", s.n},
      {"o", s.o},
      {"region", {s.region.extent.x(), s.region.extent.y(), s.region.extent.z()}},
      {"transmission_range", s.transmission_range},
      {"seed", s.seed},
      {"roles", roles},
      {"positions", positions_to_json(s.positions)},
  };
}

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  try {
    s.m = field(j, "m").get<int>();
    s.n = field(j, "n").get<int>();
    s.o = field(j, "o").get<int>();
    const Json& region = field(j, "region");
    if (!region.is_array() || region.size() != 3)
      throw FormatError("region must be [x, y, z]");
    for (int k = 0; k < 3; ++k) s.region.extent(k) = number(region[k], "region");
    s.transmission_range = number(field(j, "transmission_range"), "transmission_range");
    s.seed = field(j, "seed").get<std::uint64_t>();
    for (const Json& r : field(j, "roles")) s.roles.push_back(parse_role(r.get<std::string>()));
    s.positions = positions_from_json(field(j, "positions"));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

Json triplets_to_json(const MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != 0.0) out.push_back({i, j, m(i, j)});
  return out;
}

MatrixXd triplets_from_json(const Json& j, Eigen::Index n) {
  if (!j.is_array()) throw FormatError("triplets must be an array of [i, j, value]");
  MatrixXd m = MatrixXd::Zero(n, n);
  for (const Json& t : j) {
    if (!t.is_array() || t.size() != 3)
      throw FormatError("triplet must be [i, j, value]");
    const auto a = index_in(t[0], n, "triplet");
    const auto b = index_in(t[1], n, "triplet");
    m(a, b) = m(b, a) = number(t[2], "triplet value");
  }
  return m;
}

Json to_json(const ObservedDistances& obs) {
  Json entries = Json::array();
  const auto n = obs.size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (obs.mask(i, j)) entries.push_back({i, j, obs.entries(i, j)});
  Json out = {{"n", n}, {"entries", entries}};
  if (obs.truth_outliers.size() > 0 && (obs.truth_outliers.array() != 0.0).any())
    out["truth_outliers"] = triplets_to_json(obs.truth_outliers);
  return out;
}

ObservedDistances observations_from_json(const Json& j) {
  try {
    const Json& nj = field(j, "n");
    if (!nj.is_number_integer() || nj.get<long long>() < 0)
      throw FormatError("n must be a nonnegative integer");
    const auto n = static_cast<Eigen::Index>(nj.get<long long>());
    ObservedDistances obs(n);
    for (const Json& e : field(j, "entries")) {
      if (!e.is_array() || e.size() != 3)
        throw FormatError("entry must be [i, j, value]");
      const auto a = index_in(e[0], n, "entry");
      const auto b = index_in(e[1], n, "entry");
      if (a == b) throw FormatError("entry on the diagonal");
      obs.set(a, b, number(e[2], "entry value"));
    }
    if (j.contains("truth_outliers"))
      obs.truth_outliers = triplets_from_json(j.at("truth_outliers"), n);
    obs.validate();
    return obs;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("observations: ") + e.what());
  }
}

Json to_json(const SimilarityTransform& t) {
  Json omega = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) omega.push_back(t.omega(r, c));
  return {{"beta", t.beta},
          {"omega", omega},
          {"upsilon", {t.upsilon(0), t.upsilon(1), t.upsilon(2)}}};
}

SimilarityTransform transform_from_json(const Json& j) {
  SimilarityTransform t;
  t.beta = number(field(j, "beta"), "beta");
  const Json& omega = field(j, "omega");
  const Json& upsilon = field(j, "upsilon");
  if (!omega.is_array() || omega.size() != 9)
    throw FormatError("omega must hold 9 numbers");
  if (!upsilon.is_array() || upsilon.size() != 3)
    throw FormatError("upsilon must hold 3 numbers");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t.omega(r, c) = number(omega[3 * r + c], "omega");
  for (int k = 0; k < 3; ++k) t.upsilon(k) = number(upsilon[k], "upsilon");
  return t;
}

Json to_json(const SolveResult& r) {
  return {{"positions", positions_to_json(r.positions)},
          {"outliers", triplets_to_json(r.outliers)},
          {"objective_trace", r.objective_trace},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'", path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'", path);
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'", path);
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_trace_csv(std::ostream& out, const std::vector<PlacementStep>& trace) {
  out << "iter,objective,step_size\n" << std::setprecision(17);
  for (const auto& s : trace)
    out << s.iter << ',' << s.objective << ',' << s.step_size << '\n';
}

}  // namespace uowsn
