#include "support.hpp"

#include "uowsn/config.hpp"
#include "uowsn/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace uowsn;

namespace {

AppConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test");
}

}  // namespace

TEST_CASE("scenario json round trip") {
  const auto s = generate_scenario(10, 4, 4, Region{}, 80.0, 3);
  const Json j = to_json(s);
  const auto back = scenario_from_json(Json::parse(j.dump()));
  CHECK(back.positions == s.positions);
  CHECK(back.roles == s.roles);
  CHECK(back.seed == s.seed);
  CHECK(back.transmission_range == s.transmission_range);
  Json broken = j;
  broken.erase("positions");
  CHECK_THROWS_AS(scenario_from_json(broken), FormatError);
}

TEST_CASE("observations json round trip") {
  std::mt19937_64 rng(1);
  auto obs = testing::random_mask_obs(testing::random_positions(8, rng), 0.4, rng);
  obs.set(0, 1, obs.entries(0, 1) + 12.5, 12.5);
  const Json j = to_json(obs);
  CHECK(j.at("truth_outliers").size() == 1);
  const auto back = observations_from_json(Json::parse(j.dump()));
  CHECK(back.mask == obs.mask);
  CHECK(back.entries == obs.entries);
  CHECK(back.truth_outliers(1, 0) == 12.5);

  CHECK_THROWS_AS(observations_from_json(Json::parse(R"({"n": 3, "entries": [[0, 5, 1.0]]})")),
                  FormatError);
  CHECK_THROWS_AS(observations_from_json(Json::parse(R"({"n": 3, "entries": [[1, 1, 1.0]]})")),
                  FormatError);
  CHECK_THROWS_AS(observations_from_json(Json::parse(R"({"entries": []})")), FormatError);
}

TEST_CASE("transform and triplets round trip") {
  SimilarityTransform t;
  t.beta = 1.7;
  t.omega << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  t.upsilon << 1, 2, 3;
  const auto back = transform_from_json(Json::parse(to_json(t).dump()));
  CHECK(back.beta == t.beta);
  CHECK(back.omega == t.omega);
  CHECK(back.upsilon == t.upsilon);

  MatrixXd m = MatrixXd::Zero(4, 4);
  m(0, 2) = m(2, 0) = -3.5;
  m(1, 3) = m(3, 1) = 2.0;
  CHECK(triplets_from_json(triplets_to_json(m), 4) == m);
  CHECK(triplets_to_json(m).size() == 2);
}

TEST_CASE("solve result json") {
  SolveResult r;
  r.positions = Positions::Zero(3, 3);
  r.outliers = MatrixXd::Zero(3, 3);
  r.outliers(0, 1) = r.outliers(1, 0) = 4.0;
  r.objective_trace = {3.0, 2.0};
  r.iterations = 2;
  r.converged = true;
  const Json j = to_json(r);
  CHECK(j.at("outliers").size() == 1);
  CHECK(j.at("objective_trace").size() == 2);
  CHECK(j.at("converged") == true);
  CHECK(positions_from_json(j.at("positions")) == r.positions);
}

TEST_CASE("file helpers report missing files") {
  const auto missing = std::filesystem::temp_directory_path() / "uowsn_no_such_file.json";
  std::filesystem::remove(missing);
  try {
    read_json_file(missing);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.path() == missing);
  }
  CHECK_THROWS_AS(write_text_file("/nonexistent-dir/x.json", "{}"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "uowsn_io_test.json";
  write_json_file(path, Json{{"a", 1}});
  CHECK(read_json_file(path).at("a") == 1);
  write_text_file(path, "{not json");
  CHECK_THROWS_AS(read_json_file(path), FormatError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(missing), IoError);
}

TEST_CASE("placement trace csv") {
  std::ostringstream out;
  write_trace_csv(out, {{0, 5.0, 0.0}, {1, 4.0, 0.5}});
  CHECK(out.str() == "iter,objective,step_size\n0,5,0\n1,4,0.5\n");
}

TEST_CASE("config parsing") {
  const auto c = parse(R"(
[water]
preset = coastal
[noise]
sigma = 0.25
outlier_prob = 0.1
[solver]
lambda1 = off
lambda2 = 50
loss = tukey
restarts = 3
[placement]
mu = 500
min_degree = 0
[sim]
m = 20
n = 6
o = 5
region = 100,120,80
runs = 7
case = 2
seed = 9
)");
  CHECK(c.water_given);
  CHECK(c.setup.channel.water.preset == WaterPreset::Coastal);
  CHECK(c.setup.noise.sigma == 0.25);
  CHECK(c.setup.noise.outlier_prob == 0.1);
  CHECK(c.setup.solver.lambda1.has_value());
  CHECK_FALSE(c.setup.solver.outliers_enabled());
  CHECK(c.setup.solver.lambda2 == 50.0);
  CHECK(c.setup.solver.loss == Loss::Tukey);
  CHECK(c.setup.solver.restarts == 3);
  CHECK(c.setup.placement.mu == 500.0);
  CHECK(c.setup.options.placement_min_degree == 0);
  CHECK(c.setup.m == 20);
  CHECK(c.setup.o == 5);
  CHECK(c.setup.region.extent == Vec3(100, 120, 80));
  CHECK(c.runs == 7);
  CHECK(c.case_id == 2);
  CHECK(c.setup.seed == 9);

  const auto d = parse("[solver]\nlambda1 = auto\n");
  CHECK_FALSE(d.setup.solver.lambda1.has_value());
  CHECK_FALSE(d.water_given);
  CHECK(parse("[solver]\nlambda1 = 2.5\n").setup.solver.lambda1 == 2.5);
  CHECK(parse("[sim]\nregion = 50\n").setup.region.extent == Vec3::Constant(50));
}

TEST_CASE("config rejects unknown or malformed input") {
  CHECK_THROWS_AS(parse("[solver]\nlambda3 = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[solvr]\nlambda2 = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("sigma = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[noise]\nsigma = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse("[noise]\nsigma = 1.5x\n"), ConfigError);
  CHECK_THROWS_AS(parse("[sim]\ncase = 5\n"), ConfigError);
  CHECK_THROWS_AS(parse("[sim]\nruns = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("[water]\npreset = lake\n"), ConfigError);
  CHECK_THROWS_AS(parse("[solver]\nmonotone = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse("[sim]\nregion = 1,2\n"), ConfigError);
  CHECK_THROWS_AS(parse("[noise\nsigma = 1\n"), ConfigError);
}
