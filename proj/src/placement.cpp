#include "uowsn/placement.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

namespace uowsn {

void PlacementConfig::validate() const {
  if (!(mu > 0.0)) throw DomainError("placement: mu must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("placement: delta must lie in (0, 1)");
  if (!(c1 > 0.0 && c1 < 1.0)) throw DomainError("placement: c1 must lie in (0, 1)");
  if (!(h > 0.0)) throw DomainError("placement: h must be positive");
  if (max_outer < 1) throw DomainError("placement: max_outer must be positive");
  if (max_backtracks < 0)
    throw DomainError("placement: max_backtracks must be nonnegative");
  if (!(min_depth <= max_depth))
    throw DomainError("placement: min_depth exceeds max_depth");
}

Fim fim(const Vec3& node, const Positions& anchors, const VectorXd& sigmas) {
  if (sigmas.size() != anchors.rows())
    throw DomainError("fim: one sigma per anchor required");
  Fim out;
  for (Eigen::Index i = 0; i < anchors.rows(); ++i) {
    if (!(sigmas(i) > 0.0)) throw DomainError("fim: sigmas must be positive");
    const Vec3 diff = node - anchors.row(i).transpose();
    const double d2 = diff.squaredNorm();
    if (!(d2 > 0.0))
      throw DomainError("fim: node coincides with anchor " + std::to_string(i));
    out.j.noalias() += diff * diff.transpose() / (sigmas(i) * sigmas(i) * d2);
  }
  return out;
}

CrlbTriple crlb(const Fim& f) {
  const Mat3& j = f.j;
  const double det = j.determinant();
  // det is cubic in the information scale; compare against trace^3.
  const double scale = j.trace() / 3.0;
  if (!(det > 1e-12 * scale * scale * scale) || !(scale > 0.0))
    throw SingularGeometryError("crlb: Fisher information is singular", -1);
  CrlbTriple c;
  c.cx = (j(1, 1) * j(2, 2) - j(1, 2) * j(1, 2)) / det;
  c.cy = (j(0, 0) * j(2, 2) - j(0, 2) * j(0, 2)) / det;
  c.cz = (j(0, 0) * j(1, 1) - j(0, 1) * j(0, 1)) / det;
  return c;
}

double depth_objective(const Positions& nodes, const Positions& anchors,
                       const VectorXd& sigmas) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < nodes.rows(); ++k) {
    const Fim f = fim(nodes.row(k).transpose(), anchors, sigmas);
    try {
      total += crlb(f).cz;
    } catch (const SingularGeometryError&) {
      throw SingularGeometryError(
          "depth objective: singular anchor geometry at node " +
              std::to_string(k),
          k);
    }
  }
  return total;
}

double d_optimality(const Positions& nodes, const Positions& anchors,
                    const VectorXd& sigmas) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < nodes.rows(); ++k)
    total += fim(nodes.row(k).transpose(), anchors, sigmas).j.determinant();
  return total;
}

VectorXd depth_gradient(const Positions& nodes, const Positions& anchors,
                        const VectorXd& sigmas, double h) {
  VectorXd g(anchors.rows());
  Positions probe = anchors;
  for (Eigen::Index i = 0; i < anchors.rows(); ++i) {
    const double z = anchors(i, 2);
    probe(i, 2) = z + h;
    const double up = depth_objective(nodes, probe, sigmas);
    probe(i, 2) = z - h;
    const double down = depth_objective(nodes, probe, sigmas);
    probe(i, 2) = z;
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

namespace {

// Objective at a trial point; singular or invalid geometry counts as +inf so
// the line search backs off from it.
double trial_objective(const Positions& nodes, const Positions& anchors,
                       const VectorXd& sigmas) {
  try {
    return depth_objective(nodes, anchors, sigmas);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

PlacementResult optimize_depths(const Positions& nodes,
                                const Positions& anchors0,
                                const VectorXd& sigmas,
                                const PlacementConfig& config,
                                const AnchorFeasibility& feasible) {
  config.validate();
  if (feasible && !feasible(anchors0))
    throw DomainError("optimize_depths: initial anchors are infeasible");
  PlacementResult result;
  result.anchors = anchors0;
  double value = depth_objective(nodes, anchors0, sigmas);
  if (!std::isfinite(value))
    throw NumericalError("optimize_depths: initial objective is not finite");
  result.trace.push_back({0, value, 0.0});

  Positions& anchors = result.anchors;
  for (int t = 1; t <= config.max_outer; ++t) {
    const VectorXd g = depth_gradient(nodes, anchors, sigmas, config.h);
    if (!g.allFinite())
      throw NumericalError("optimize_depths: non-finite gradient at iteration " +
                           std::to_string(t));
    if (g.norm() < 1e-10) break;

    bool accepted = false;
    double step = config.mu;
    for (int s = 0; s <= config.max_backtracks; ++s, step *= config.delta) {
      Positions trial = anchors;
      trial.col(2) = (anchors.col(2) - step * g)
                         .cwiseMax(config.min_depth)
                         .cwiseMin(config.max_depth);
      const double moved = g.dot(anchors.col(2) - trial.col(2));
      const double candidate =
          feasible && !feasible(trial)
              ? std::numeric_limits<double>::infinity()
              : trial_objective(nodes, trial, sigmas);
      if (candidate < value && candidate <= value - config.c1 * moved) {
        anchors = std::move(trial);
        value = candidate;
        result.trace.push_back({t, value, step});
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return result;
}

}  // namespace uowsn
