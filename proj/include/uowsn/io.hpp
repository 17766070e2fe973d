#pragma once

// JSON and CSV file formats for scenarios, observations, solver results,
// transforms and anchor placements.

#include "uowsn/align.hpp"
#include "uowsn/placement.hpp"
#include "uowsn/ranging.hpp"
#include "uowsn/scenario.hpp"
#include "uowsn/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace uowsn {

using Json = nlohmann::json;

/// Missing, unreadable or unwritable file. Carries the path.
class IoError : public Error {
 public:
  IoError(const std::string& what, std::filesystem::path path)
      : Error(what), path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Malformed document content.
class FormatError : public Error {
 public:
  using Error::Error;
};

Json positions_to_json(const Positions& p);
Positions positions_from_json(const Json& j);

Json to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);

/// {n, entries: [[i, j, value]...] for i < j, truth_outliers: [[i, j, o]...]}
/// with only the nonzero outliers listed.
Json to_json(const ObservedDistances& obs);
ObservedDistances observations_from_json(const Json& j);

/// {beta, omega: 9 numbers row-major, upsilon: 3 numbers}
Json to_json(const SimilarityTransform& t);
SimilarityTransform transform_from_json(const Json& j);

/// {positions, outliers: [[i, j, o]...] for i < j and o != 0,
///  objective_trace, iterations, converged}
Json to_json(const SolveResult& r);

/// Upper-triangle nonzero entries of a symmetric matrix as [[i, j, v]...].
Json triplets_to_json(const MatrixXd& m);
MatrixXd triplets_from_json(const Json& j, Eigen::Index n);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// iter,objective,step_size
void write_trace_csv(std::ostream& out, const std::vector<PlacementStep>& trace);

}  // namespace uowsn
