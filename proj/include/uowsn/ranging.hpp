#pragma once

// RSS ranging: inversion of the optical link budget and construction of the
// partially observed, noisy, outlier-contaminated distance matrix.

#include "uowsn/channel.hpp"
#include "uowsn/lambert_w.hpp"
#include "uowsn/scenario.hpp"
#include "uowsn/types.hpp"

#include <cstdint>
#include <optional>

namespace uowsn {

struct RangingNoise {
  double sigma = 0.6;
  double outlier_prob = 0.0;
  /// Upper bound of the additive Uniform(0, scale) outlier magnitude. Unset
  /// means the scenario region diagonal.
  std::optional<double> outlier_scale;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Symmetric, partially observed pairwise distance matrix.
struct ObservedDistances {
  MatrixXd entries;
  MaskMatrix mask;
  /// Injected outlier per pair; simulation bookkeeping only.
  MatrixXd truth_outliers;

  ObservedDistances() = default;
  explicit ObservedDistances(Eigen::Index n)
      : entries(MatrixXd::Zero(n, n)),
        mask(MaskMatrix::Constant(n, n, false)),
        truth_outliers(MatrixXd::Zero(n, n)) {}

  Eigen::Index size() const { return entries.rows(); }
  Eigen::Index observed_pairs() const;

  /// Sets both (i, j) and (j, i).
  void set(Eigen::Index i, Eigen::Index j, double value, double outlier = 0.0);

  /// Throws DomainError unless the invariants (symmetry, zero unobserved
  /// diagonal, finite nonnegative observations) hold.
  void validate() const;
};

/// Distance d > 0 whose noise-free received power equals p_r. Closed form
/// d = (2 cos t / e) W0((e / (2 cos t)) sqrt(K / p_r)), reducing to
/// sqrt(K / p_r) as e -> 0.
double invert_power(const OpticalLink& link, double extinction, double p_r);

/// Simulates RSS ranging on every pair within the scenario's transmission
/// range: forward link budget, inversion, additive Gaussian noise and, with
/// probability outlier_prob, an additive Uniform(0, outlier_scale) outlier.
/// Values are clamped at 0. Each pair draws from its own stream seeded by
/// (noise.seed, i, j).
ObservedDistances estimate_pairwise(const Scenario& scenario,
                                    const WaterModel& water,
                                    const OpticalLink& link,
                                    const RangingNoise& noise);

/// Marks every anchor pair observed with its exact distance, which is known
/// from the anchor coordinates. Existing anchor-pair entries are replaced.
void add_anchor_distances(ObservedDistances& obs, const Scenario& scenario);

/// splitmix64 finaliser, used to derive independent RNG streams.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b = 0);

}  // namespace uowsn
