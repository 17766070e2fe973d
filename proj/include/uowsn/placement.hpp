#pragma once

// Anchor depth placement from the Cramer-Rao bound of range-only position
// estimation under Gaussian ranging noise.

#include "uowsn/types.hpp"

#include <functional>
#include <vector>

namespace uowsn {

/// Fisher information of one node position, J = sum_i u_i u_i^T / sigma_i^2
/// with u_i the unit vector from anchor i to the node.
struct Fim {
  Mat3 j = Mat3::Zero();
};

/// Variance lower bounds of the three coordinates (m^2).
struct CrlbTriple {
  double cx = 0.0;
  double cy = 0.0;
  double cz = 0.0;
};

struct PlacementConfig {
  double mu = 1000.0;
  double delta = 0.5;
  double c1 = 1e-4;
  double h = 1e-3;
  int max_outer = 200;
  /// Backtracking cap per outer iteration.
  int max_backtracks = 60;
  /// Depth box for the anchors (m below the surface).
  double min_depth = 0.0;
  double max_depth = 100.0;

  void validate() const;
};

struct PlacementStep {
  int iter = 0;
  double objective = 0.0;
  double step_size = 0.0;
};

struct PlacementResult {
  Positions anchors;
  std::vector<PlacementStep> trace;
};

/// Throws DomainError if the node coincides with an anchor or a sigma is not
/// positive.
Fim fim(const Vec3& node, const Positions& anchors, const VectorXd& sigmas);

/// Diagonal of J^{-1} from cofactors. Throws SingularGeometryError when
/// det(J) is not safely positive.
CrlbTriple crlb(const Fim& f);

/// Sum over nodes of the depth bound cz. Singular nodes raise
/// SingularGeometryError carrying the node index.
double depth_objective(const Positions& nodes, const Positions& anchors,
                       const VectorXd& sigmas);

/// Sum over nodes of det(J).
double d_optimality(const Positions& nodes, const Positions& anchors,
                    const VectorXd& sigmas);

/// Central-difference gradient of depth_objective with respect to the anchor
/// depths (z column) only.
VectorXd depth_gradient(const Positions& nodes, const Positions& anchors,
                        const VectorXd& sigmas, double h);

/// Projected gradient descent on the anchor depths with Armijo backtracking
/// mu * delta^s. x, y of every anchor stay fixed. Stops when no trial step
/// decreases the objective, the gradient vanishes, or max_outer is reached.
/// The trace starts with the initial objective (iter 0, step 0) and is
/// strictly decreasing. Trial anchors rejected by `feasible` are treated like
/// a singular geometry; the initial anchors must pass it.
using AnchorFeasibility = std::function<bool(const Positions& anchors)>;

PlacementResult optimize_depths(const Positions& nodes,
                                const Positions& anchors0,
                                const VectorXd& sigmas,
                                const PlacementConfig& config,
                                const AnchorFeasibility& feasible = {});

}  // namespace uowsn
