#pragma once

// Robust localization from a partially observed distance matrix: sparse
// outlier estimation by soft thresholding, stress majorization through the
// observation-graph Laplacians, and a half-quadratic position update with a
// ridge penalty on the configuration.

#include "uowsn/ranging.hpp"
#include "uowsn/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace uowsn {

enum class Loss { Huber, Tukey, L2 };

std::string_view to_string(Loss loss);
Loss parse_loss(std::string_view name);

/// How rho is turned into the half-quadratic threshold each iteration.
enum class ThresholdScale {
  /// rho is used as is (same units as the residual).
  Absolute,
  /// rho multiplies a robust scale (normalised MAD) of the current residual.
  Mad,
  /// rho multiplies the root mean square of the current residual.
  Rms,
};

std::string_view to_string(ThresholdScale s);

/// Outlier update. Soft: o = soft_threshold(r, lambda1), penalty lambda1 |o|.
/// Hard: o = r where |r| > lambda1 / 2, else 0, penalty lambda1^2 / 4 per
/// nonzero entry; the same dead zone with a bounded cost per outlier.
enum class OutlierRule { Soft, Hard };

std::string_view to_string(OutlierRule r);
OutlierRule parse_outlier_rule(std::string_view name);
ThresholdScale parse_threshold_scale(std::string_view name);

struct SolverConfig {
  /// Outlier sparsity weight. Unset selects the adaptive rule
  /// 2 * 1.345 * MAD(residuals), never increasing across iterations.
  /// +infinity disables outlier estimation (O stays zero).
  std::optional<double> lambda1;
  /// Floor for the adaptive rule (m); keeps exact data from driving the
  /// weight to zero and absorbing every residual into O.
  double lambda1_min = 1.0;
  OutlierRule outlier_rule = OutlierRule::Soft;
  double lambda2 = 150.0;
  double c = 1.0;
  double rho = 1.345;
  ThresholdScale rho_scale = ThresholdScale::Absolute;
  Loss loss = Loss::Huber;
  int max_iters = 500;
  double tol = 1e-6;
  /// Reject position updates that would increase the objective; the plain
  /// majorization step (A = 0) is tried before keeping the current positions.
  bool monotone = true;
  /// Rescale each update to the least-squares optimal size against the
  /// outlier-corrected ranges, undoing the uniform lambda2 shrinkage.
  bool rescale = true;
  /// Iterations run with outlier estimation off before it is switched on;
  /// the warm-up ends early once the relative change drops below warmup_tol.
  int warmup_iters = 0;
  double warmup_tol = 1e-4;
  /// Independent random starts, each solved in full; the lowest objective
  /// (at the smallest lambda1 any start reached) wins. Ignored when an
  /// initial configuration is supplied.
  int restarts = 5;
  /// Adds one start from classical MDS of the shortest-path completed
  /// distances to the random starts.
  bool mds_start = true;
  /// With outlier estimation on, adds one more start: the full least-squares
  /// solve (lambda1 = +inf, same starts) continued with outliers enabled.
  bool ls_seeded_start = true;
  /// Rounds of single-node relocation after each warm-up: every node is
  /// re-fitted against its fixed neighbours from several starts and moved
  /// when its local stress drops; the warm-up then resumes. 0 disables.
  int relocation_rounds = 5;
  /// Random starts per node in each relocation sweep.
  int relocation_starts = 24;
  /// Random initial configuration: uniform in [0, init_extent] per axis.
  Vec3 init_extent = Vec3::Constant(100.0);
  std::uint64_t seed = 0;

  static constexpr double kDisabled = std::numeric_limits<double>::infinity();

  bool outliers_enabled() const {
    return !lambda1 || std::isfinite(*lambda1);
  }
  void validate() const;
};

struct SolverState {
  Positions positions;
  MatrixXd outliers;
  Positions aux;
  int iteration = 0;
  double lambda1 = 0.0;
  std::vector<double> objective_trace;
};

struct SolveResult {
  Positions positions;
  MatrixXd outliers;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  /// Outlier weight in effect at the last iteration.
  double lambda1 = 0.0;
};

/// sign(x) max(|x| - lambda1 / 2, 0), the minimiser over o of
/// (x - o)^2 + lambda1 |o|.
template <typename Scalar>
Scalar soft_threshold(Scalar x, Scalar lambda1) {
  using std::abs;
  const Scalar mag = abs(x) - lambda1 / Scalar(2);
  if (!(mag > Scalar(0))) return Scalar(0);
  return x < Scalar(0) ? -mag : mag;
}

/// Half-quadratic minimiser of the auxiliary variables, elementwise:
///   huber: sign(r) max(|r| - rho, 0)
///   tukey: r for |r| > rho, else r (1 - (1 - (r/rho)^2)^2)
///   l2:    0
template <typename Derived>
typename Derived::PlainObject hq_minimizer(
    const Eigen::MatrixBase<Derived>& residual,
    typename Derived::Scalar rho, Loss loss) {
  using Scalar = typename Derived::Scalar;
  if (!(rho > Scalar(0)) && loss != Loss::L2)
    throw DomainError("hq_minimizer: rho must be positive");
  switch (loss) {
    case Loss::Huber:
      return residual.unaryExpr([rho](Scalar r) {
        using std::abs;
        const Scalar tail = abs(r) - rho;
        if (!(tail > Scalar(0))) return Scalar(0);
        return r < Scalar(0) ? -tail : tail;
      });
    case Loss::Tukey:
      return residual.unaryExpr([rho](Scalar r) {
        using std::abs;
        if (abs(r) > rho) return r;
        const Scalar u = r / rho;
        const Scalar w = Scalar(1) - u * u;
        return r * (Scalar(1) - w * w);
      });
    case Loss::L2:
      break;
  }
  return Derived::PlainObject::Zero(residual.rows(), residual.cols());
}

/// Euclidean distance matrix of the rows of P.
MatrixXd pairwise_distances(const Positions& positions);

/// Unit-weight Laplacian of the observation graph: degree on the diagonal,
/// -1 on observed pairs.
MatrixXd base_laplacian(const MaskMatrix& mask);

/// Majorization Laplacian: -(dhat - o) / d(P) on observed pairs with
/// d(P) != 0 and dhat > o, 0 elsewhere off the diagonal, and a diagonal that
/// makes every row sum to zero.
MatrixXd laplacian_plus(const Positions& positions, const MatrixXd& outliers,
                        const ObservedDistances& obs);

/// x where |x| > lambda1 / 2, else 0: the minimiser over o of
/// (x - o)^2 + (lambda1^2 / 4) [o != 0].
template <typename Scalar>
Scalar hard_threshold(Scalar x, Scalar lambda1) {
  using std::abs;
  return abs(x) > lambda1 / Scalar(2) ? x : Scalar(0);
}

/// Thresholded residuals dhat - d(P) on observed pairs, 0 elsewhere.
/// lambda1 = +infinity yields the zero matrix.
MatrixXd update_outliers(const Positions& positions,
                         const ObservedDistances& obs, double lambda1,
                         OutlierRule rule = OutlierRule::Soft);

/// Sum over observed pairs of (dhat - d(P) - o)^2 plus the outlier penalty:
/// lambda1 |o| (soft) or lambda1^2 / 4 per nonzero o (hard).
double objective(const Positions& positions, const MatrixXd& outliers,
                 const ObservedDistances& obs, double lambda1,
                 OutlierRule rule = OutlierRule::Soft);

/// Normalised median absolute deviation 1.4826 * median |x - median x|.
double robust_scale(std::vector<double> values);

/// Closed-form position update kappa V^+ (L+ P + A / c) with V the
/// observation-graph Laplacian and kappa = c N^2 / (c N^2 + lambda2). For a
/// complete mask V^+ = C / N and this equals c (c V^T V + lambda2 I)^{-1} V^T R.
/// V + 11^T / N is factorised once.
class PositionUpdate {
 public:
  PositionUpdate(const MatrixXd& laplacian, const SolverConfig& config);

  Positions operator()(const Positions& positions, const MatrixXd& lplus,
                       const Positions& aux) const;

  const MatrixXd& laplacian() const { return laplacian_; }
  double shrink() const { return shrink_; }

 private:
  MatrixXd laplacian_;
  double c_;
  double shrink_ = 1.0;
  Eigen::LLT<MatrixXd> centred_;
};

/// Residual fed to the half-quadratic minimiser, L P - L+ P.
Positions hq_residual(const MatrixXd& laplacian, const MatrixXd& lplus,
                      const Positions& positions);

/// Threshold actually passed to hq_minimizer for a residual under config.
double hq_threshold(const Positions& residual, const SolverConfig& config);

/// Observed entries with the unobserved pairs filled by shortest paths
/// through the observation graph (Floyd-Warshall). Throws
/// DisconnectedGraphError when some pair has no path.
MatrixXd shortest_path_completion(const ObservedDistances& obs);

/// Classical (Torgerson) MDS: the top three eigenpairs of -C D^2 C / 2 with
/// negative eigenvalues clipped to zero.
Positions classical_mds(const MatrixXd& distances);

/// One relocation sweep over all nodes in place, each node minimising its
/// share of the objective with the outliers on its links minimised out. Returns the number of nodes
/// moved.
int relocate_nodes(Positions& positions, const ObservedDistances& obs,
                   double lambda1, OutlierRule rule, int starts,
                   std::uint64_t seed);

/// Scale s minimising sum over observed pairs of (dhat - o - s d(P))^2;
/// 1 when undefined.
double optimal_scale(const Positions& positions, const MatrixXd& outliers,
                     const ObservedDistances& obs);

/// One full iteration in place: outliers, L+, auxiliaries, positions.
/// Returns the relative Frobenius change of the positions.
double iterate(SolverState& state, const ObservedDistances& obs,
               const PositionUpdate& update, const SolverConfig& config);

/// Throws DisconnectedGraphError naming the components when the observation
/// graph is not connected.
void require_connected(const MaskMatrix& mask);

SolverState initial_state(const ObservedDistances& obs,
                          const SolverConfig& config,
                          const std::optional<Positions>& init = std::nullopt);

/// Relative positions (defined up to a similarity and reflection), the
/// outlier estimate and the objective trace.
SolveResult solve(const ObservedDistances& obs, const SolverConfig& config,
                  const std::optional<Positions>& init = std::nullopt);

/// Observed entries kept, unobserved pairs filled with d(P).
MatrixXd completed_distances(const ObservedDistances& obs,
                             const Positions& positions);

}  // namespace uowsn
