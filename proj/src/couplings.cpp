#include "cavsq/couplings.hpp"

#include <cmath>

#include "cavsq/errors.hpp"

namespace cavsq {

EffectiveCouplings::EffectiveCouplings(cplx xi1, cplx xi2) : xi1_(xi1), xi2_(xi2) {
  const double a1 = std::abs(xi1);
  const double a2 = std::abs(xi2);
  if (!(a1 > 0.0) || !(a2 > a1) || !std::isfinite(a2)) {
    throw ArgumentError("effective couplings require |xi2| > |xi1| > 0");
  }
  r_ = a2 / a1;
  theta_ = std::sqrt((a2 - a1) * (a2 + a1));
}

EffectiveCouplings EffectiveCouplings::from_ratio(double r, double theta) {
  if (!(r > 1.0)) throw ArgumentError("coupling ratio r must exceed 1");
  if (!(theta > 0.0)) throw ArgumentError("Theta must be positive");
  const double xi1 = theta / std::sqrt((r - 1.0) * (r + 1.0));
  return {cplx(xi1, 0.0), cplx(r * xi1, 0.0)};
}

}  // namespace cavsq
