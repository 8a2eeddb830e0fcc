#pragma once

#include <vector>

#include "cavsq/couplings.hpp"
#include "cavsq/fock.hpp"

namespace cavsq {

/// Closed-form reference for the evolution from the three-mode vacuum.
///
/// The propagator acting on |0,0>|0> collapses to
///   e^{alpha4} sum_{m,n} alpha1^m alpha2^n sqrt((m+n)! / (m! n!)) |m+n, n>|m>,
/// with e^{alpha4} = 1/sqrt(1+n1), |alpha1|^2 = n3/(1+n1), |alpha2|^2 = n2/(1+n1).
/// The phases follow xi1^{m+n} xi2^n; alpha1 changes sign with sin(Theta t).

Occupations occupations_closed_form(const EffectiveCouplings& c, double t);

/// zeta12 of the propagated state: n1 - n2 equals the spin excitation number,
/// geometric with mean n3, so zeta12 = n3 (1 + n3) / (n1 + n2) (1 when n1 + n2 = 0).
double zeta12_closed_form(const EffectiveCouplings& c, double t);

struct PropagatorAmplitudes {
  cplx alpha1;
  cplx alpha2;
  double exp_alpha4;
  double t;
};

PropagatorAmplitudes propagator_amplitudes(const EffectiveCouplings& c, double t);

/// Amplitudes of |m+n, n>|m> for 0 <= m <= m_max, 0 <= n <= n_max.
class AmplitudeTable {
 public:
  AmplitudeTable(int m_max, int n_max);

  int m_max() const noexcept { return m_max_; }
  int n_max() const noexcept { return n_max_; }
  cplx operator()(int m, int n) const { return data_[index(m, n)]; }
  cplx& operator()(int m, int n) { return data_[index(m, n)]; }
  double norm_squared() const;

  /// Embeds the table into a three-mode Fock state; entries outside the layout are dropped.
  FockState to_state(const ModeLayout& layout) const;

 private:
  std::size_t index(int m, int n) const;
  int m_max_;
  int n_max_;
  std::vector<cplx> data_;
};

/// Throws CutoffError when the truncated norm falls below 1 - tail_tolerance.
AmplitudeTable evolved_amplitudes(const EffectiveCouplings& c, double t, int m_max, int n_max,
                                  double tail_tolerance = 1e-10);

/// Two-mode squeezed amplitudes over |n,n>, n = 0..n_max, magnitude-normalized over the truncation.
std::vector<double> tmss_amplitudes(double r, int n_max);

/// epsilon = artanh(2r / (1 + r^2)).
double squeezing_parameter(double r);

/// Photons per cavity mode at T_pi: 4 r^2 / (r^2 - 1)^2.
double photons_at_t_pi(double r);

double t_pi(const EffectiveCouplings& c);
double t_pi_from_theta(double theta);

}  // namespace cavsq
