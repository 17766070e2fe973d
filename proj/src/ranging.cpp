#include "uowsn/ranging.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace uowsn {

void RangingNoise::validate() const {
  if (!(sigma >= 0.0)) throw DomainError("noise: sigma must be nonnegative");
  if (!(outlier_prob >= 0.0 && outlier_prob <= 1.0))
    throw DomainError("noise: outlier_prob must lie in [0, 1]");
  if (outlier_scale && !(*outlier_scale >= 0.0))
    throw DomainError("noise: outlier_scale must be nonnegative");
}

Eigen::Index ObservedDistances::observed_pairs() const {
  return mask.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().count();
}

void ObservedDistances::set(Eigen::Index i, Eigen::Index j, double value,
                            double outlier) {
  entries(i, j) = entries(j, i) = value;
  truth_outliers(i, j) = truth_outliers(j, i) = outlier;
  mask(i, j) = mask(j, i) = true;
}

void ObservedDistances::validate() const {
  const auto n = entries.rows();
  if (entries.cols() != n || mask.rows() != n || mask.cols() != n)
    throw DomainError("observations: matrices must be square and equal-sized");
  if (truth_outliers.size() != 0 &&
      (truth_outliers.rows() != n || truth_outliers.cols() != n))
    throw DomainError("observations: outlier bookkeeping has the wrong shape");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask(i, i) || entries(i, i) != 0.0)
      throw DomainError("observations: diagonal must be zero and unobserved");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (mask(i, j) != mask(j, i) || entries(i, j) != entries(j, i))
        throw DomainError("observations: matrix is not symmetric at (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
      if (mask(i, j) && !(std::isfinite(entries(i, j)) && entries(i, j) >= 0.0))
        throw DomainError("observations: entry (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") is not finite and nonnegative");
    }
  }
}

double invert_power(const OpticalLink& link, double extinction, double p_r) {
  if (!(p_r > 0.0)) throw DomainError("invert_power: received power must be positive");
  if (!(extinction >= 0.0))
    throw DomainError("invert_power: extinction must be nonnegative");
  const double spread = std::sqrt(link.prefactor() / p_r);
  const double half = extinction / (2.0 * std::cos(link.theta));
  if (half == 0.0) return spread;
  return lambert_w0(half * spread) / half;
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(mix_seed(seed) ^ a) ^ b);
}

ObservedDistances estimate_pairwise(const Scenario& scenario,
                                    const WaterModel& water,
                                    const OpticalLink& link,
                                    const RangingNoise& noise) {
  noise.validate();
  link.validate();
  const int n = scenario.size();
  if (n < 2) throw DomainError("estimate_pairwise: need at least two nodes");

  const double extinction = extinction_coefficient(water);
  const double scale = noise.outlier_scale.value_or(scenario.region.diagonal());
  ObservedDistances obs(n);

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d =
          (scenario.positions.row(i) - scenario.positions.row(j)).norm();
      if (!(d <= scenario.transmission_range)) continue;

      // Coincident nodes have no defined received power; their range is 0.
      const double ranged =
          d > 0.0 ? invert_power(link, extinction,
                                 received_power(link, extinction, d))
                  : 0.0;

      std::mt19937_64 rng(derive_seed(noise.seed, static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(j)));
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double n_ij = noise.sigma * gauss(rng);
      const bool corrupt = unit(rng) < noise.outlier_prob;
      const double magnitude = unit(rng) * scale;
      const double o_ij = corrupt ? magnitude : 0.0;

      obs.set(i, j, std::max(0.0, ranged + n_ij + o_ij), o_ij);
    }
  }
  return obs;
}

void add_anchor_distances(ObservedDistances& obs, const Scenario& scenario) {
  if (obs.size() != scenario.size())
    throw DomainError("anchor distances: observation size does not match scenario");
  const auto idx = scenario.anchor_indices();
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      obs.set(idx[a], idx[b],
              (scenario.positions.row(idx[a]) - scenario.positions.row(idx[b]))
                  .norm());
}

}  // namespace uowsn
