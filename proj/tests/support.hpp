#pragma once

// Shared fixtures and independent oracles for the unit tests.

#include "uowsn/ranging.hpp"
#include "uowsn/types.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace testing {

using uowsn::MatrixXd;
using uowsn::ObservedDistances;
using uowsn::Positions;

inline Positions random_positions(int n, std::mt19937_64& rng, double extent = 100.0) {
  std::uniform_real_distribution<double> u(0.0, extent);
  Positions p(n, 3);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) p(i, k) = u(rng);
  return p;
}

inline double dist(const Positions& p, int i, int j) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += (p(i, k) - p(j, k)) * (p(i, k) - p(j, k));
  return std::sqrt(s);
}

// Exact distances on the pairs kept by `keep` (all pairs when empty).
inline ObservedDistances exact_obs(const Positions& p,
                                   const std::function<bool(int, int)>& keep = {}) {
  const int n = static_cast<int>(p.rows());
  ObservedDistances obs(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!keep || keep(i, j)) obs.set(i, j, dist(p, i, j));
  return obs;
}

// Pair (i, j) kept with probability q, plus a Hamiltonian path so the graph
// stays connected.
inline ObservedDistances random_mask_obs(const Positions& p, double q, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(q);
  const int n = static_cast<int>(p.rows());
  MatrixXd keep = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) keep(i, j) = (j == i + 1 || coin(rng)) ? 1.0 : 0.0;
  return exact_obs(p, [&](int i, int j) { return keep(i, j) != 0.0; });
}

inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi,
                          int steps) {
  double best_x = lo;
  double best = f(lo);
  for (int k = 1; k <= steps; ++k) {
    const double x = lo + (hi - lo) * k / steps;
    const double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

// Straight re-implementation of the soft-rule objective.
inline double objective_oracle(const Positions& p, const MatrixXd& o,
                               const ObservedDistances& obs, double lambda1) {
  double total = 0.0;
  const int n = static_cast<int>(p.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!obs.mask(i, j)) continue;
      const double r = obs.entries(i, j) - dist(p, i, j) - o(i, j);
      total += r * r;
      if (std::isfinite(lambda1)) total += lambda1 * std::abs(o(i, j));
    }
  }
  return total;
}

// Relative closeness with an absolute floor.
inline bool close(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

}  // namespace testing
