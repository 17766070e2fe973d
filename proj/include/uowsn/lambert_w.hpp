#pragma once

#include "uowsn/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace uowsn {

/// Principal branch W0 of the Lambert W function: the w >= -1 solving
/// w e^w = x. Halley iteration from a branch-point series near -1/e and a
/// log-based guess elsewhere. Throws DomainError for x < -1/e.
template <typename Scalar>
Scalar lambert_w0(Scalar x) {
  using std::abs;
  using std::exp;
  using std::log1p;
  using std::log;
  using std::sqrt;

  const Scalar inv_e = Scalar(1) / std::numbers::e_v<Scalar>;
  if (std::isnan(x) || x < -inv_e)
    throw DomainError("lambert_w0: argument below -1/e");
  if (x == Scalar(0)) return Scalar(0);
  if (std::isinf(x)) return x;

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar w;
  if (x < Scalar(-0.25)) {
    // Series about the branch point in p = sqrt(2 (e x + 1)).
    const Scalar p = sqrt(Scalar(2) * (std::numbers::e_v<Scalar> * x + 1));
    if (p < sqrt(eps)) return p - Scalar(1);
    w = Scalar(-1) + p - p * p / Scalar(3) + Scalar(11) / Scalar(72) * p * p * p;
  } else if (x < Scalar(3)) {
    w = log1p(x);
    w = w * (Scalar(1) - log1p(w) / (Scalar(2) + w));
  } else {
    const Scalar l1 = log(x);
    const Scalar l2 = log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int it = 0; it < 64; ++it) {
    const Scalar ew = exp(w);
    const Scalar f = w * ew - x;
    const Scalar wp1 = w + Scalar(1);
    if (wp1 == Scalar(0)) break;
    const Scalar step = f / (ew * wp1 - (w + Scalar(2)) * f / (Scalar(2) * wp1));
    w -= step;
    if (abs(step) <= Scalar(4) * eps * (Scalar(1) + abs(w))) break;
  }
  return w;
}

}  // namespace uowsn
