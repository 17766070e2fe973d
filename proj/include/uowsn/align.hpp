#pragma once

// Similarity (scaled orthogonal Procrustes) alignment of a relative
// configuration onto known anchor coordinates. Points are rows; a transform
// maps p to beta * p * omega + upsilon.

#include "uowsn/types.hpp"

#include <Eigen/SVD>

#include <string>

namespace uowsn {

template <typename Scalar>
struct SimilarityTransformT {
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  using RowVec3 = Eigen::Matrix<Scalar, 1, 3>;

  Scalar beta = Scalar(1);
  Mat3 omega = Mat3::Identity();
  RowVec3 upsilon = RowVec3::Zero();

  static SimilarityTransformT identity() { return {}; }

  /// Transform equal to applying *this first and then `after`.
  SimilarityTransformT then(const SimilarityTransformT& after) const {
    SimilarityTransformT out;
    out.beta = beta * after.beta;
    out.omega = omega * after.omega;
    out.upsilon = after.beta * upsilon * after.omega + after.upsilon;
    return out;
  }
};

using SimilarityTransform = SimilarityTransformT<double>;

template <typename Derived>
PositionsT<typename Derived::Scalar> apply_transform(
    const SimilarityTransformT<typename Derived::Scalar>& t,
    const Eigen::MatrixBase<Derived>& points) {
  static_assert(Derived::ColsAtCompileTime == 3 ||
                Derived::ColsAtCompileTime == Eigen::Dynamic);
  PositionsT<typename Derived::Scalar> out = t.beta * points * t.omega;
  out.rowwise() += t.upsilon;
  return out;
}

/// Number of affine dimensions spanned by the rows, judged by singular values
/// of the centred point set relative to the largest one.
template <typename Derived>
int affine_rank(const Eigen::MatrixBase<Derived>& points,
                typename Derived::Scalar rel_tol = 1e-9) {
  using Scalar = typename Derived::Scalar;
  if (points.rows() < 2) return 0;
  PositionsT<Scalar> centred = points;
  centred.rowwise() -= centred.colwise().mean();
  Eigen::JacobiSVD<PositionsT<Scalar>> svd(centred);
  const auto& s = svd.singularValues();
  if (!(s(0) > Scalar(0))) return 0;
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > rel_tol * s(0)) ++rank;
  return rank;
}

/// Least-squares similarity taking `estimated` onto `reference` (row k to
/// row k), with a proper rotation (det = +1). Needs at least four
/// corresponding points that span 3D; throws RankDeficiencyError otherwise.
template <typename DerivedA, typename DerivedB>
SimilarityTransformT<typename DerivedA::Scalar> fit_procrustes(
    const Eigen::MatrixBase<DerivedA>& estimated,
    const Eigen::MatrixBase<DerivedB>& reference) {
  using Scalar = typename DerivedA::Scalar;
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  if (estimated.rows() != reference.rows() || estimated.cols() != 3 ||
      reference.cols() != 3)
    throw DomainError("fit_procrustes: point sets must be o x 3 and equal-sized");
  if (estimated.rows() < 4)
    throw RankDeficiencyError("fit_procrustes: need at least 4 anchors, got " +
                              std::to_string(estimated.rows()));
  const int rank_ref = affine_rank(reference);
  if (rank_ref < 3)
    throw RankDeficiencyError("fit_procrustes: reference anchors span only " +
                              std::to_string(rank_ref) +
                              " dimension(s); coplanar or collinear anchors");
  const int rank_est = affine_rank(estimated);
  if (rank_est < 3)
    throw RankDeficiencyError("fit_procrustes: estimated anchors span only " +
                              std::to_string(rank_est) + " dimension(s)");

  const auto mean_est = estimated.colwise().mean().eval();
  const auto mean_ref = reference.colwise().mean().eval();
  PositionsT<Scalar> x = estimated;
  PositionsT<Scalar> y = reference;
  x.rowwise() -= mean_est;
  y.rowwise() -= mean_ref;

  const Mat3 cross = x.transpose() * y;
  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 flip = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < Scalar(0))
    flip(2, 2) = Scalar(-1);

  SimilarityTransformT<Scalar> t;
  t.omega = svd.matrixU() * flip * svd.matrixV().transpose();
  t.beta = (svd.singularValues().asDiagonal() * flip).trace() / x.squaredNorm();
  t.upsilon = mean_ref - t.beta * mean_est * t.omega;
  return t;
}

}  // namespace uowsn
