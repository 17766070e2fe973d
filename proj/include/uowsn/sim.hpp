#pragma once

// Scenario generation, the four evaluation cases and Monte Carlo sweeps.

#include "uowsn/align.hpp"
#include "uowsn/channel.hpp"
#include "uowsn/placement.hpp"
#include "uowsn/ranging.hpp"
#include "uowsn/scenario.hpp"
#include "uowsn/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace uowsn {

struct GenerationOptions {
  /// Seabed sensors are drawn in the bottom fraction of the depth range.
  double seabed_band = 0.1;
  /// Buoys get random distinct depths in (0, depth); otherwise they sit on
  /// the surface.
  bool random_anchor_depths = true;
  /// Minimum separation between anchor depths when drawn at random (m).
  double min_anchor_depth_gap = 1.0;
  /// Every node needs this many neighbours within range; 4 is the minimum
  /// for a unique position in 3D.
  int min_degree = 4;
  int max_retries = 1000;
};

/// Observation graph at `range` is connected and every node has at least
/// `min_degree` neighbours.
bool well_connected(const Positions& positions, double range, int min_degree);

/// Uniform random network, resampled until well_connected holds at `range`.
/// Deterministic per seed.
Scenario generate_scenario(int m, int n, int o, const Region& region,
                           double range, std::uint64_t seed,
                           const GenerationOptions& options = {});

/// sqrt(||truth - estimate||_F^2 / rows).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar rmse(const Eigen::MatrixBase<DerivedA>& truth,
                               const Eigen::MatrixBase<DerivedB>& estimate) {
  using std::sqrt;
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
    throw DomainError("rmse: shape mismatch");
  if (truth.rows() == 0) return typename DerivedA::Scalar(0);
  return sqrt((truth - estimate).squaredNorm() /
              static_cast<typename DerivedA::Scalar>(truth.rows()));
}

struct AnchorAlignment {
  SimilarityTransform transform;
  /// The relative solution was mirrored (z negated) before the fit.
  bool mirrored = false;
  double anchor_residual = 0.0;
  Positions global;
};

/// Maps a relative solution into the anchor frame. A relative configuration
/// is only defined up to a reflection, so both handednesses are fitted with a
/// proper rotation and the one with the smaller anchor residual is kept.
AnchorAlignment align_to_anchors(const Positions& relative,
                                 const std::vector<int>& anchor_rows,
                                 const Positions& true_anchors);

/// Anchors moved to optimized depths (x, y kept), starting from the current
/// anchor depths of the scenario. With min_degree > 0 a depth is only
/// accepted while the network stays well connected at the scenario range.
PlacementResult optimize_anchor_depths(const Scenario& scenario, double sigma,
                                       const PlacementConfig& config,
                                       int min_degree = 4);

struct RunOptions {
  /// Add the exact anchor-to-anchor distances to the observations.
  bool known_anchor_ranges = true;
  /// Degree kept by every node while anchor depths are optimized; 0 lifts
  /// the constraint.
  int placement_min_degree = 4;
};

struct ChannelSetup {
  WaterModel water = WaterModel::from_preset(WaterPreset::ClearOcean);
  OpticalLink link;
};

struct RunResult {
  double rmse = 0.0;
  int iterations = 0;
  bool converged = false;
  VectorXd node_errors;
  int case_id = 0;
  std::string label;
};

/// Case labels: 1 random depths + outliers kept, 2 optimized depths +
/// outliers kept, 3 random depths + outlier removal, 4 optimized depths +
/// outlier removal.
std::string case_label(int case_id);

/// One localization run. Random-depth cases use the scenario as given;
/// optimized-depth cases first move the anchors with optimize_anchor_depths.
/// Cases 1 and 2 force lambda1 = +inf. Seeds for ranging noise and solver
/// initialisation are derived from `seed`.
RunResult run_case(int case_id, const Scenario& scenario,
                   const ChannelSetup& channel, const RangingNoise& noise,
                   const SolverConfig& solver, const PlacementConfig& placement,
                   std::uint64_t seed, const RunOptions& options = {});

enum class SweepParam { Sigma, Outliers, Lambda2 };

std::string_view to_string(SweepParam p);

struct SweepSpec {
  SweepParam param = SweepParam::Sigma;
  std::vector<double> values;
  int case_id = 4;

  /// "name:start:stop:count", name in {sigma, outliers, lambda2}; count >= 1
  /// evenly spaced points including both ends.
  static SweepSpec parse(const std::string& text);
};

struct ExperimentSetup {
  int m = 10;
  int n = 4;
  int o = 4;
  Region region;
  double range = 80.0;
  std::uint64_t seed = 0;
  GenerationOptions generation;
  ChannelSetup channel;
  RangingNoise noise;
  SolverConfig solver;
  PlacementConfig placement;
  RunOptions options;
};

struct SweepRow {
  SweepParam param = SweepParam::Sigma;
  double value = 0.0;
  double mean_rmse = 0.0;
  double median_rmse = 0.0;
  double std_rmse = 0.0;
  int failures = 0;
  /// Per-run RMSE of the successful runs, in run order.
  std::vector<double> rmses;
};

/// Runs `runs` Monte Carlo trials at every sweep point. Run r uses a scenario
/// and noise drawn from (setup.seed, r), shared across sweep points so the
/// comparison is paired. Failed runs are counted, not fatal.
std::vector<SweepRow> monte_carlo(const ExperimentSetup& setup,
                                  const SweepSpec& sweep, int runs);

/// Aggregates with population standard deviation (0 for a single run).
void summarise(SweepRow& row);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace uowsn
