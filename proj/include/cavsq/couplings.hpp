#pragma once

#include "cavsq/types.hpp"

namespace cavsq {

/// Raw coupling rates (rad/s) of the three-oscillator Hamiltonian
///   H = i xi1 a1^dag c^dag - i xi1^* a1 c + i xi2 a2^dag c - i xi2^* a2 c^dag.
/// No constraint is placed on the values; operator builders accept any pair.
struct Couplings {
  cplx xi1{0.0, 0.0};
  cplx xi2{0.0, 0.0};
};

/// Coupling pair in the squeezing regime |xi2| > |xi1| > 0.
///
/// Exposes the derived ratio r = |xi2 / xi1| and oscillation rate
/// Theta = sqrt(|xi2|^2 - |xi1|^2). Construction fails outside the regime.
class EffectiveCouplings {
 public:
  EffectiveCouplings(cplx xi1, cplx xi2);

  /// Real positive couplings with the given ratio r > 1 and rate Theta > 0 (rad/s).
  static EffectiveCouplings from_ratio(double r, double theta);

  cplx xi1() const noexcept { return xi1_; }
  cplx xi2() const noexcept { return xi2_; }
  double r() const noexcept { return r_; }
  double theta() const noexcept { return theta_; }

  Couplings raw() const noexcept { return {xi1_, xi2_}; }
  operator Couplings() const noexcept { return raw(); }  // NOLINT(google-explicit-constructor)

 private:
  cplx xi1_;
  cplx xi2_;
  double r_;
  double theta_;
};

/// Normally ordered occupations (n1, n2, n3) = (<a1^dag a1>, <a2^dag a2>, <c^dag c>).
struct Occupations {
  double n1 = 0.0;
  double n2 = 0.0;
  double n3 = 0.0;
};

}  // namespace cavsq
