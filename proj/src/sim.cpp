#include "uowsn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace uowsn {

bool well_connected(const Positions& positions, double range, int min_degree) {
  if (positions.rows() <= 1) return true;
  const MaskMatrix mask = range_mask(positions, range);
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    if (mask.row(i).count() < min_degree) return false;
  return connected_components(mask).size() == 1;
}

Scenario generate_scenario(int m, int n, int o, const Region& region,
                           double range, std::uint64_t seed,
                           const GenerationOptions& options) {
  if (m < 0 || n < 0 || o < 0)
    throw DomainError("generate_scenario: counts must be nonnegative");
  if (!(region.extent.array() > 0.0).all())
    throw DomainError("generate_scenario: region must be nonempty");
  if (!(range >= 0.0))
    throw DomainError("generate_scenario: range must be nonnegative");

  Scenario s;
  s.m = m;
  s.n = n;
  s.o = o;
  s.region = region;
  s.transmission_range = range;
  s.seed = seed;
  s.roles.assign(m, Role::Seabed);
  s.roles.insert(s.roles.end(), n, Role::Relay);
  s.roles.insert(s.roles.end(), o, Role::Buoy);
  s.positions.resize(m + n + o, 3);

  const Vec3& ext = region.extent;
  const double depth = region.depth();
  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    std::mt19937_64 rng(derive_seed(seed, 0x5ce7a210, attempt));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < m + n + o; ++i) {
      const double x = unit(rng) * ext.x();
      const double y = unit(rng) * ext.y();
      double z = 0.0;
      if (i < m) {
        z = depth * (1.0 - options.seabed_band * unit(rng));
      } else if (i < m + n) {
        z = unit(rng) * depth;
      }
      s.positions.row(i) << x, y, z;
    }
    if (options.random_anchor_depths && o > 0) {
      // Distinct depths so the anchor set is never coplanar by construction.
      std::vector<double> depths;
      while (static_cast<int>(depths.size()) < o) {
        const double z = unit(rng) * depth;
        const bool clear = std::all_of(depths.begin(), depths.end(), [&](double d) {
          return std::abs(d - z) >= options.min_anchor_depth_gap;
        });
        if (clear && z > 0.0) depths.push_back(z);
      }
      for (int k = 0; k < o; ++k) s.positions(m + n + k, 2) = depths[k];
    }
    if (well_connected(s.positions, range, options.min_degree)) return s;
  }
  throw DomainError("generate_scenario: no well-connected network after " +
                    std::to_string(options.max_retries) +
                    " attempts; try a larger transmission range");
}

AnchorAlignment align_to_anchors(const Positions& relative,
                                 const std::vector<int>& anchor_rows,
                                 const Positions& true_anchors) {
  const auto rows = static_cast<Eigen::Index>(anchor_rows.size());
  if (true_anchors.rows() != rows)
    throw DomainError("align: anchor count mismatch");
  Positions estimated(rows, 3);
  for (Eigen::Index k = 0; k < rows; ++k)
    estimated.row(k) = relative.row(anchor_rows[k]);

  AnchorAlignment best;
  bool have = false;
  for (bool mirror : {false, true}) {
    Positions candidate = relative;
    Positions est = estimated;
    if (mirror) {
      candidate.col(2) *= -1.0;
      est.col(2) *= -1.0;
    }
    const SimilarityTransform t = fit_procrustes(est, true_anchors);
    const double residual = (apply_transform(t, est) - true_anchors).norm();
    if (!have || residual < best.anchor_residual) {
      best.transform = t;
      best.mirrored = mirror;
      best.anchor_residual = residual;
      best.global = apply_transform(t, candidate);
      have = true;
    }
  }
  return best;
}

PlacementResult optimize_anchor_depths(const Scenario& scenario, double sigma,
                                       const PlacementConfig& config,
                                       int min_degree) {
  PlacementConfig cfg = config;
  cfg.min_depth = std::max(cfg.min_depth, 0.0);
  cfg.max_depth = std::min(cfg.max_depth, scenario.region.depth());
  const VectorXd sigmas = VectorXd::Constant(scenario.o, sigma > 0.0 ? sigma : 1.0);
  AnchorFeasibility feasible;
  if (min_degree > 0) {
    // Never demand more than the deployed network already has.
    const MaskMatrix mask =
        range_mask(scenario.positions, scenario.transmission_range);
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
      min_degree = std::min(min_degree, static_cast<int>(mask.row(i).count()));
    feasible = [&scenario, min_degree](const Positions& anchors) {
      Positions all = scenario.positions;
      all.bottomRows(scenario.o) = anchors;
      return well_connected(all, scenario.transmission_range, min_degree);
    };
  }
  return optimize_depths(scenario.unknowns(), scenario.anchors(), sigmas, cfg,
                         feasible);
}

std::string case_label(int case_id) {
  switch (case_id) {
    case 1: return "random-depth+outliers";
    case 2: return "optimal-depth+outliers";
    case 3: return "random-depth+outlier-removal";
    case 4: return "optimal-depth+outlier-removal";
    default: break;
  }
  throw DomainError("unknown case " + std::to_string(case_id));
}

RunResult run_case(int case_id, const Scenario& scenario,
                   const ChannelSetup& channel, const RangingNoise& noise,
                   const SolverConfig& solver, const PlacementConfig& placement,
                   std::uint64_t seed, const RunOptions& options) {
  RunResult result;
  result.case_id = case_id;
  result.label = case_label(case_id);
  scenario.validate();

  Scenario deployed = scenario;
  if (case_id == 2 || case_id == 4) {
    const PlacementResult placed =
        optimize_anchor_depths(scenario, noise.sigma, placement,
                               options.placement_min_degree);
    deployed.positions.bottomRows(deployed.o) = placed.anchors;
  }

  RangingNoise run_noise = noise;
  run_noise.seed = derive_seed(seed, 0x7a11);
  ObservedDistances obs =
      estimate_pairwise(deployed, channel.water, channel.link, run_noise);
  if (options.known_anchor_ranges) add_anchor_distances(obs, deployed);

  SolverConfig cfg = solver;
  cfg.seed = derive_seed(seed, 0x501e);
  cfg.init_extent = deployed.region.extent;
  if (case_id == 1 || case_id == 2) cfg.lambda1 = SolverConfig::kDisabled;

  const SolveResult solved = solve(obs, cfg);
  const AnchorAlignment aligned = align_to_anchors(
      solved.positions, deployed.anchor_indices(), deployed.anchors());

  const auto unknown = deployed.unknown_count();
  result.node_errors =
      (aligned.global.topRows(unknown) - deployed.unknowns()).rowwise().norm();
  result.rmse = rmse(deployed.unknowns(), aligned.global.topRows(unknown));
  result.iterations = solved.iterations;
  result.converged = solved.converged;
  return result;
}

std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Sigma: return "sigma";
    case SweepParam::Outliers: return "outliers";
    case SweepParam::Lambda2: return "lambda2";
  }
  return "sigma";
}

SweepSpec SweepSpec::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 4)
    throw DomainError("sweep: expected name:start:stop:count, got '" + text + "'");

  SweepSpec spec;
  if (parts[0] == "sigma") spec.param = SweepParam::Sigma;
  else if (parts[0] == "outliers") spec.param = SweepParam::Outliers;
  else if (parts[0] == "lambda2") spec.param = SweepParam::Lambda2;
  else throw DomainError("sweep: unknown parameter '" + parts[0] + "'");

  double start = 0.0;
  double stop = 0.0;
  int count = 0;
  try {
    std::size_t used = 0;
    start = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    stop = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
    count = std::stoi(parts[3], &used);
    if (used != parts[3].size()) throw std::invalid_argument(parts[3]);
  } catch (const std::logic_error&) {
    throw DomainError("sweep: malformed number in '" + text + "'");
  }
  if (count < 1) throw DomainError("sweep: count must be at least 1");
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    spec.values.push_back(start + t * (stop - start));
  }
  return spec;
}

void summarise(SweepRow& row) {
  const auto& v = row.rmses;
  if (v.empty()) {
    row.mean_rmse = row.median_rmse = row.std_rmse =
        std::numeric_limits<double>::quiet_NaN();
    return;
  }
  const double count = static_cast<double>(v.size());
  row.mean_rmse = std::accumulate(v.begin(), v.end(), 0.0) / count;
  double ss = 0.0;
  for (double x : v) ss += (x - row.mean_rmse) * (x - row.mean_rmse);
  row.std_rmse = std::sqrt(ss / count);
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  row.median_rmse = sorted.size() % 2 ? sorted[mid]
                                      : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

std::vector<SweepRow> monte_carlo(const ExperimentSetup& setup,
                                  const SweepSpec& sweep, int runs) {
  if (runs < 1) throw DomainError("monte_carlo: runs must be at least 1");
  std::vector<SweepRow> rows;
  for (double value : sweep.values) {
    SweepRow row;
    row.param = sweep.param;
    row.value = value;

    RangingNoise noise = setup.noise;
    SolverConfig solver = setup.solver;
    switch (sweep.param) {
      case SweepParam::Sigma: noise.sigma = value; break;
      case SweepParam::Outliers: noise.outlier_prob = value; break;
      case SweepParam::Lambda2: solver.lambda2 = value; break;
    }

    for (int r = 0; r < runs; ++r) {
      const std::uint64_t run_seed = derive_seed(setup.seed, 0x3c, r);
      try {
        const Scenario scenario =
            generate_scenario(setup.m, setup.n, setup.o, setup.region,
                              setup.range, run_seed, setup.generation);
        const RunResult res = run_case(sweep.case_id, scenario, setup.channel,
                                       noise, solver, setup.placement, run_seed,
                                       setup.options);
        row.rmses.push_back(res.rmse);
      } catch (const Error&) {
        ++row.failures;
      }
    }
    summarise(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "sweep_param,value,mean_rmse,median_rmse,std_rmse,failures\n";
  out << std::setprecision(17);
  for (const auto& row : rows) {
    out << to_string(row.param) << ',' << row.value << ',' << row.mean_rmse
        << ',' << row.median_rmse << ',' << row.std_rmse << ','
        << row.failures << '\n';
  }
}

}  // namespace uowsn
