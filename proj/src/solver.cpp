#include "uowsn/solver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>
#include <sstream>
#include <string>

namespace uowsn {

std::string_view to_string(Loss loss) {
  switch (loss) {
    case Loss::Huber: return "huber";
    case Loss::Tukey: return "tukey";
    case Loss::L2: return "l2";
  }
  return "huber";
}

Loss parse_loss(std::string_view name) {
  for (auto l : {Loss::Huber, Loss::Tukey, Loss::L2})
    if (to_string(l) == name) return l;
  throw DomainError("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(ThresholdScale s) {
  switch (s) {
    case ThresholdScale::Absolute: return "absolute";
    case ThresholdScale::Mad: return "mad";
    case ThresholdScale::Rms: return "rms";
  }
  return "mad";
}

ThresholdScale parse_threshold_scale(std::string_view name) {
  if (name == "absolute") return ThresholdScale::Absolute;
  if (name == "mad") return ThresholdScale::Mad;
  if (name == "rms") return ThresholdScale::Rms;
  throw DomainError("unknown threshold scale '" + std::string(name) + "'");
}

std::string_view to_string(OutlierRule r) {
  return r == OutlierRule::Hard ? "hard" : "soft";
}

OutlierRule parse_outlier_rule(std::string_view name) {
  if (name == "soft") return OutlierRule::Soft;
  if (name == "hard") return OutlierRule::Hard;
  throw DomainError("unknown outlier rule '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
  if (lambda1 && !(*lambda1 >= 0.0))
    throw DomainError("solver: lambda1 must be nonnegative");
  if (!(lambda2 >= 0.0)) throw DomainError("solver: lambda2 must be nonnegative");
  if (!(c > 0.0)) throw DomainError("solver: c must be positive");
  if (!(rho > 0.0)) throw DomainError("solver: rho must be positive");
  if (warmup_iters < 0) throw DomainError("solver: warmup_iters must be nonnegative");
  if (!(warmup_tol > 0.0)) throw DomainError("solver: warmup_tol must be positive");
  if (restarts < 1) throw DomainError("solver: restarts must be positive");
  if (!(lambda1_min >= 0.0))
    throw DomainError("solver: lambda1_min must be nonnegative");
  if (relocation_rounds < 0)
    throw DomainError("solver: relocation_rounds must be nonnegative");
  if (relocation_starts < 1)
    throw DomainError("solver: relocation_starts must be positive");
  if (max_iters < 1) throw DomainError("solver: max_iters must be positive");
  if (!(tol > 0.0)) throw DomainError("solver: tol must be positive");
  if (!(init_extent.array() > 0.0).all())
    throw DomainError("solver: init_extent must be positive");
}

MatrixXd pairwise_distances(const Positions& positions) {
  const auto n = positions.rows();
  MatrixXd d = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = (positions.row(i) - positions.row(j)).norm();
  return d;
}

MatrixXd base_laplacian(const MaskMatrix& mask) {
  const auto n = mask.rows();
  MatrixXd lap = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && mask(i, j)) {
        lap(i, j) = -1.0;
        lap(i, i) += 1.0;
      }
    }
  }
  return lap;
}

MatrixXd laplacian_plus(const Positions& positions, const MatrixXd& outliers,
                        const ObservedDistances& obs) {
  const auto n = obs.size();
  MatrixXd lp = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!obs.mask(i, j)) continue;
      const double target = obs.entries(i, j) - outliers(i, j);
      const double d = (positions.row(i) - positions.row(j)).norm();
      if (d == 0.0 || !(target > 0.0)) continue;
      lp(i, j) = lp(j, i) = -target / d;
    }
  }
  lp.diagonal() = -lp.rowwise().sum();
  return lp;
}

MatrixXd update_outliers(const Positions& positions,
                         const ObservedDistances& obs, double lambda1,
                         OutlierRule rule) {
  const auto n = obs.size();
  MatrixXd o = MatrixXd::Zero(n, n);
  if (std::isinf(lambda1)) return o;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!obs.mask(i, j)) continue;
      const double r =
          obs.entries(i, j) - (positions.row(i) - positions.row(j)).norm();
      o(i, j) = o(j, i) = rule == OutlierRule::Soft ? soft_threshold(r, lambda1)
                                                    : hard_threshold(r, lambda1);
    }
  }
  return o;
}

double objective(const Positions& positions, const MatrixXd& outliers,
                 const ObservedDistances& obs, double lambda1,
                 OutlierRule rule) {
  const auto n = obs.size();
  double fit = 0.0;
  double l1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!obs.mask(i, j)) continue;
      const double r = obs.entries(i, j) -
                       (positions.row(i) - positions.row(j)).norm() -
                       outliers(i, j);
      fit += r * r;
      if (rule == OutlierRule::Soft) l1 += std::abs(outliers(i, j));
      else if (outliers(i, j) != 0.0) l1 += lambda1 / 4.0;
    }
  }
  // With outlier estimation disabled O is identically zero.
  return std::isinf(lambda1) ? fit : fit + lambda1 * l1;
}

double robust_scale(std::vector<double> values) {
  if (values.empty()) return 0.0;
  auto median = [](std::vector<double>& v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double med = *mid;
    if (v.size() % 2 == 0) med = 0.5 * (med + *std::max_element(v.begin(), mid));
    return med;
  };
  const double center = median(values);
  for (double& v : values) v = std::abs(v - center);
  return 1.4826 * median(values);
}

PositionUpdate::PositionUpdate(const MatrixXd& laplacian,
                               const SolverConfig& config)
    : laplacian_(laplacian), c_(config.c) {
  const auto n = static_cast<double>(laplacian_.rows());
  shrink_ = config.c * n * n / (config.c * n * n + config.lambda2);
  MatrixXd centred = laplacian_;
  centred.array() += 1.0 / n;
  centred_.compute(centred);
  if (centred_.info() != Eigen::Success)
    throw NumericalError(
        "position update: observation graph Laplacian is singular on the "
        "centred subspace");
}

Positions PositionUpdate::operator()(const Positions& positions,
                                     const MatrixXd& lplus,
                                     const Positions& aux) const {
  const Positions r = lplus * positions + aux / c_;
  Positions p = centred_.solve(r);
  p.rowwise() -= p.colwise().mean();
  return shrink_ * p;
}

Positions hq_residual(const MatrixXd& laplacian, const MatrixXd& lplus,
                      const Positions& positions) {
  return (laplacian - lplus) * positions;
}

double hq_threshold(const Positions& residual, const SolverConfig& config) {
  if (config.rho_scale == ThresholdScale::Absolute) return config.rho;
  double scale = 0.0;
  if (config.rho_scale == ThresholdScale::Mad) {
    std::vector<double> values(residual.data(),
                               residual.data() + residual.size());
    scale = robust_scale(values);
  }
  if (!(scale > 0.0)) {
    // More than half the entries vanish; fall back to the RMS.
    scale = std::sqrt(residual.squaredNorm() /
                      std::max<Eigen::Index>(residual.size(), 1));
  }
  if (!(scale > 0.0)) scale = 1.0;
  return config.rho * scale;
}

MatrixXd shortest_path_completion(const ObservedDistances& obs) {
  const auto n = obs.size();
  const double inf = std::numeric_limits<double>::infinity();
  MatrixXd d = MatrixXd::Constant(n, n, inf);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && obs.mask(i, j)) d(i, j) = obs.entries(i, j);
  }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  if (!d.allFinite()) require_connected(obs.mask);
  return d;
}

Positions classical_mds(const MatrixXd& distances) {
  const auto n = distances.rows();
  if (distances.cols() != n) throw DomainError("classical_mds: matrix must be square");
  const MatrixXd centring =
      MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const MatrixXd gram =
      -0.5 * centring * distances.array().square().matrix() * centring;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw NumericalError("classical_mds: eigendecomposition failed");
  Positions p = Positions::Zero(n, 3);
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(3, n); ++k) {
    const Eigen::Index col = n - 1 - k;
    p.col(k) = eig.eigenvectors().col(col) *
               std::sqrt(std::max(eig.eigenvalues()(col), 0.0));
  }
  return p;
}

namespace {

// Penalised cost of one link with its outlier minimised out.
double link_cost(double r, double lambda1, OutlierRule rule) {
  if (!std::isfinite(lambda1)) return r * r;
  const double half = 0.5 * lambda1;
  if (rule == OutlierRule::Hard) return std::min(r * r, half * half);
  const double a = std::abs(r);
  return a <= half ? r * r : lambda1 * a - half * half;
}

double node_cost(const Positions& p, Eigen::Index i, const Vec3& at,
                 const ObservedDistances& obs, double lambda1, OutlierRule rule) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < p.rows(); ++j) {
    if (j == i || !obs.mask(i, j)) continue;
    const double r = obs.entries(i, j) - (at - p.row(j).transpose()).norm();
    total += link_cost(r, lambda1, rule);
  }
  return total;
}

// Alternating outlier / Guttman steps for a single node, others fixed.
Vec3 refine_node(const Positions& p, Eigen::Index i, Vec3 at,
                 const ObservedDistances& obs, double lambda1, OutlierRule rule) {
  for (int it = 0; it < 50; ++it) {
    Vec3 next = Vec3::Zero();
    int deg = 0;
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      if (j == i || !obs.mask(i, j)) continue;
      const Vec3 pj = p.row(j).transpose();
      const Vec3 diff = at - pj;
      const double d = diff.norm();
      const double r = obs.entries(i, j) - d;
      double o = 0.0;
      if (std::isfinite(lambda1))
        o = rule == OutlierRule::Hard ? hard_threshold(r, lambda1)
                                      : soft_threshold(r, lambda1);
      const double target = std::max(obs.entries(i, j) - o, 0.0);
      next += pj;
      if (d > 0.0) next += target / d * diff;
      ++deg;
    }
    if (deg == 0) return at;
    next /= deg;
    const double moved = (next - at).norm();
    at = next;
    if (moved < 1e-6) break;
  }
  return at;
}

}  // namespace

int relocate_nodes(Positions& positions, const ObservedDistances& obs,
                   double lambda1, OutlierRule rule, int starts,
                   std::uint64_t seed) {
  const Vec3 lo = positions.colwise().minCoeff().transpose();
  const Vec3 hi = positions.colwise().maxCoeff().transpose();
  const Vec3 pad = 0.1 * (hi - lo) + Vec3::Constant(1.0);
  std::mt19937_64 rng(derive_seed(seed, 0x4e10));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int moved = 0;
  for (Eigen::Index i = 0; i < positions.rows(); ++i) {
    const Vec3 current = positions.row(i).transpose();
    double best = node_cost(positions, i, current, obs, lambda1, rule);
    Vec3 best_at = current;
    for (int s = 0; s < starts; ++s) {
      Vec3 start;
      for (int k = 0; k < 3; ++k)
        start(k) = lo(k) - pad(k) + unit(rng) * (hi(k) - lo(k) + 2.0 * pad(k));
      const Vec3 at = refine_node(positions, i, start, obs, lambda1, rule);
      const double value = node_cost(positions, i, at, obs, lambda1, rule);
      if (value < best * (1.0 - 1e-3) - 1e-9) {
        best = value;
        best_at = at;
      }
    }
    if (best_at != current) {
      positions.row(i) = best_at.transpose();
      ++moved;
    }
  }
  return moved;
}

double optimal_scale(const Positions& positions, const MatrixXd& outliers,
                     const ObservedDistances& obs) {
  double num = 0.0;
  double den = 0.0;
  const auto n = obs.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!obs.mask(i, j)) continue;
      const double d = (positions.row(i) - positions.row(j)).norm();
      num += (obs.entries(i, j) - outliers(i, j)) * d;
      den += d * d;
    }
  }
  return den > 0.0 && num > 0.0 ? num / den : 1.0;
}

namespace {

std::vector<double> observed_residuals(const Positions& positions,
                                       const ObservedDistances& obs) {
  std::vector<double> r;
  const auto n = obs.size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (obs.mask(i, j))
        r.push_back(obs.entries(i, j) -
                    (positions.row(i) - positions.row(j)).norm());
  return r;
}

double next_lambda1(const SolverState& state, const ObservedDistances& obs,
                    const SolverConfig& config) {
  if (config.lambda1) return *config.lambda1;
  const double proposed =
      2.0 * 1.345 * robust_scale(observed_residuals(state.positions, obs));
  return std::min(state.lambda1, std::max(proposed, config.lambda1_min));
}

}  // namespace

double iterate(SolverState& state, const ObservedDistances& obs,
               const PositionUpdate& update, const SolverConfig& config) {
  const Positions& p = state.positions;
  state.lambda1 = next_lambda1(state, obs, config);
  state.outliers = update_outliers(p, obs, state.lambda1, config.outlier_rule);

  const MatrixXd lplus = laplacian_plus(p, state.outliers, obs);
  const Positions residual = hq_residual(update.laplacian(), lplus, p);
  state.aux = hq_minimizer(residual, hq_threshold(residual, config), config.loss);

  auto rescaled = [&](Positions q) {
    if (config.rescale) q *= optimal_scale(q, state.outliers, obs);
    return q;
  };
  Positions next = rescaled(update(p, lplus, state.aux));
  double value = objective(next, state.outliers, obs, state.lambda1, config.outlier_rule);
  if (config.monotone) {
    const double current = objective(p, state.outliers, obs, state.lambda1, config.outlier_rule);
    if (!(value <= current)) {
      next = rescaled(update(p, lplus, Positions::Zero(p.rows(), 3)));
      value = objective(next, state.outliers, obs, state.lambda1, config.outlier_rule);
      if (!(value <= current)) {
        next = p;
        value = current;
      }
    }
  }
  if (!next.allFinite() || !std::isfinite(value)) {
    throw NumericalError("solver: non-finite positions at iteration " +
                         std::to_string(state.iteration + 1));
  }

  const double change =
      (next - p).norm() / std::max(p.norm(), 1.0);
  state.positions = std::move(next);
  ++state.iteration;
  state.objective_trace.push_back(value);
  return change;
}

void require_connected(const MaskMatrix& mask) {
  auto components = connected_components(mask);
  if (components.size() <= 1) return;
  std::ostringstream msg;
  msg << "solver: observation graph is disconnected into " << components.size()
      << " components:";
  for (const auto& comp : components) {
    msg << " {";
    for (std::size_t k = 0; k < comp.size(); ++k)
      msg << (k ? ", " : "") << comp[k];
    msg << "}";
  }
  throw DisconnectedGraphError(msg.str(), std::move(components));
}

SolverState initial_state(const ObservedDistances& obs,
                          const SolverConfig& config,
                          const std::optional<Positions>& init) {
  const auto n = obs.size();
  SolverState state;
  if (init) {
    if (init->rows() != n)
      throw DomainError("solver: initial configuration has the wrong size");
    state.positions = *init;
  } else {
    std::mt19937_64 rng(derive_seed(config.seed, 0x1417));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    state.positions.resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int k = 0; k < 3; ++k)
        state.positions(i, k) = unit(rng) * config.init_extent(k);
  }
  state.outliers = MatrixXd::Zero(n, n);
  state.aux = Positions::Zero(n, 3);
  state.lambda1 = config.lambda1.value_or(std::numeric_limits<double>::infinity());
  return state;
}

namespace {

struct StartOutcome {
  SolverState state;
  bool converged = false;
};

// Runs iterations until the relative change drops below tol or the budget is
// spent. Returns whether tol was reached.
bool run_phase(SolverState& state, const ObservedDistances& obs,
               const PositionUpdate& update, const SolverConfig& config,
               int budget, double tol) {
  for (int k = 0; k < budget && state.iteration < config.max_iters; ++k)
    if (iterate(state, obs, update, config) < tol) return true;
  return false;
}

StartOutcome run_start(const ObservedDistances& obs, const PositionUpdate& update,
                       const SolverConfig& config, const SolverConfig& warm,
                       SolverState state) {
  const bool outliers = config.outliers_enabled();
  if (outliers && config.warmup_iters > 0) {
    run_phase(state, obs, update, warm, config.warmup_iters, config.warmup_tol);
    state.lambda1 =
        config.lambda1.value_or(std::numeric_limits<double>::infinity());
  }
  const SolverConfig& main = outliers ? config : warm;
  StartOutcome out;
  out.converged = run_phase(state, obs, update, main, config.max_iters, config.tol);
  for (int round = 0; round < config.relocation_rounds; ++round) {
    const double lambda1 = outliers ? state.lambda1 : SolverConfig::kDisabled;
    if (relocate_nodes(state.positions, obs, lambda1, config.outlier_rule,
                       config.relocation_starts,
                       derive_seed(config.seed, 0x4e11, round)) == 0)
      break;
    state.outliers = update_outliers(state.positions, obs, lambda1, config.outlier_rule);
    state.objective_trace.push_back(objective(state.positions, state.outliers, obs,
                                              lambda1, config.outlier_rule));
    out.converged =
        run_phase(state, obs, update, main, config.max_iters, config.tol);
  }
  out.state = std::move(state);
  return out;
}

double start_score(const SolverState& state, const ObservedDistances& obs,
                   double lambda1, OutlierRule rule) {
  return objective(state.positions,
                   update_outliers(state.positions, obs, lambda1, rule), obs,
                   lambda1, rule);
}

}  // namespace

SolveResult solve(const ObservedDistances& obs, const SolverConfig& config,
                  const std::optional<Positions>& init) {
  config.validate();
  obs.validate();
  if (obs.size() < 2) throw DomainError("solver: need at least two nodes");
  require_connected(obs.mask);

  const PositionUpdate update(base_laplacian(obs.mask), config);

  SolverConfig warm = config;
  warm.lambda1 = SolverConfig::kDisabled;
  std::vector<std::optional<Positions>> starts;
  if (init) {
    starts.emplace_back(*init);
  } else {
    if (config.mds_start)
      starts.emplace_back(classical_mds(shortest_path_completion(obs)));
    for (int r = 0; r < config.restarts; ++r) starts.emplace_back();
  }

  std::vector<StartOutcome> outcomes;
  int random_starts = 0;
  for (const auto& start : starts) {
    SolverConfig start_cfg = config;
    if (!start) {
      start_cfg.seed = random_starts == 0
                           ? config.seed
                           : derive_seed(config.seed, 0x5747, random_starts);
      ++random_starts;
    }
    SolverConfig start_warm = warm;
    start_warm.seed = start_cfg.seed;
    outcomes.push_back(run_start(obs, update, start_cfg, start_warm,
                                 initial_state(obs, start_cfg, start)));
  }
  if (!init && config.ls_seeded_start && config.outliers_enabled()) {
    SolverConfig ls = warm;
    ls.ls_seeded_start = false;
    const SolveResult base = solve(obs, ls);
    outcomes.push_back(
        run_start(obs, update, config, warm, initial_state(obs, config, base.positions)));
  }

  // Starts are compared at the tightest outlier weight any of them reached.
  double common = SolverConfig::kDisabled;
  if (config.outliers_enabled())
    for (const auto& o : outcomes) common = std::min(common, o.state.lambda1);
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const double score =
        start_score(outcomes[k].state, obs, common, config.outlier_rule);
    if (score < best_score) {
      best_score = score;
      best = k;
    }
  }

  SolverState& state = outcomes[best].state;
  SolveResult result;
  result.converged = outcomes[best].converged;
  result.positions = std::move(state.positions);
  result.outliers = std::move(state.outliers);
  result.objective_trace = std::move(state.objective_trace);
  result.iterations = state.iteration;
  result.lambda1 = state.lambda1;
  return result;
}

MatrixXd completed_distances(const ObservedDistances& obs,
                             const Positions& positions) {
  MatrixXd out = pairwise_distances(positions);
  const auto n = obs.size();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (obs.mask(i, j)) out(i, j) = obs.entries(i, j);
  return out;
}

}  // namespace uowsn
