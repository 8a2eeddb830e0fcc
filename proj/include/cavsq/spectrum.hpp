#pragma once

#include <span>
#include <string>
#include <vector>

#include "cavsq/couplings.hpp"
#include "cavsq/gaussian.hpp"

namespace cavsq {

enum class Regime { ThreeMinima, SingleBroad, Narrow };

std::string to_string(Regime r);

struct SpectralMinimum {
  double omega = 0.0;  // rad/s
  double s = 0.0;
};

struct SpectrumResult {
  std::vector<double> omega;  // rad/s
  std::vector<double> s_plus;
  std::vector<double> s_minus;
  /// Local minima of s_plus.
  std::vector<SpectralMinimum> minima;
  Regime regime = Regime::Narrow;
  /// Rate used to scale omega for output; 0 when the couplings vanish.
  double theta = 0.0;
  /// Shot-noise calibration divisor applied to the raw correlator.
  double calibration = 1.0;

  std::vector<double> omega_over_theta() const;
  double min_s_plus() const;
};

struct StabilityReport {
  bool stable = false;
  double max_real_eigenvalue = 0.0;
  cplx worst_eigenvalue{0.0, 0.0};
};

/// Spectral abscissa of the drift matrix. A spin mode that is both undamped and
/// uncoupled is left out of the analysis.
StabilityReport stability_check(const Couplings& c, const DecayRates& d);

/// 2001-point grid over [-3 Theta, 3 Theta] when Theta >= kappa, else [-3 kappa, 3 kappa].
std::vector<double> default_grid(double theta, double kappa, int points = 2001);

/// Output spectra S+ (difference of amplitude quadratures) and S- (sum of phase
/// quadratures) from the linear Langevin equations with input noise at d.n_thermal.
SpectrumResult squeezing_spectrum(const Couplings& c, const DecayRates& d, std::span<const double> omega_grid);

/// Strict local minima of the 3-sample moving average (endpoints kept as is).
std::vector<SpectralMinimum> find_minima(std::span<const double> omega, std::span<const double> s);

/// Full width of the dip around `index` at level (1 + s[index]) / 2.
double dip_width(std::span<const double> omega, std::span<const double> s, std::size_t index);

Regime classify_regime(const SpectrumResult& result, double theta, double kappa);

/// (1/2pi) Integral of G D G^dag over all frequencies, G = (-i omega - M)^-1.
Matrix6 spectral_steady_state(const Couplings& c, const DecayRates& d, int samples = 40001);

/// Lyapunov steady state reached by evolving the vacuum for many relaxation times.
Matrix6 lyapunov_steady_state(const Couplings& c, const DecayRates& d);

}  // namespace cavsq
