#include "cavsq/feasibility.hpp"

#include <cmath>

#include "cavsq/analytic.hpp"
#include "cavsq/errors.hpp"
#include "cavsq/types.hpp"

namespace cavsq {

double thermal_occupation(double frequency, double temperature) {
  if (!(frequency > 0.0) || !(temperature >= 0.0)) {
    throw ArgumentError("thermal occupation needs positive frequency and non-negative temperature");
  }
  if (temperature == 0.0) return 0.0;
  const double x = PhysicalConstants::planck_reduced * kTwoPi * frequency / (PhysicalConstants::boltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double crossover_temperature(double frequency) {
  if (!(frequency > 0.0)) throw ArgumentError("frequency must be positive");
  return PhysicalConstants::planck_reduced * kTwoPi * frequency / PhysicalConstants::boltzmann;
}

double absorption_rate(double g_single, double n_atoms, double gamma_a) {
  if (!(gamma_a > 0.0)) throw ArgumentError("gamma_a must be positive");
  if (!(n_atoms >= 0.0)) throw ArgumentError("atom number must be non-negative");
  return g_single * g_single * n_atoms / gamma_a;
}

double thermal_suppression(double kappa, double gamma_c) {
  if (!(kappa > 0.0) || !(gamma_c >= 0.0)) throw ArgumentError("need kappa > 0 and gamma_c >= 0");
  return kappa / (gamma_c + kappa);
}

double heating_rate(double kappa, double n_thermal) {
  if (!(kappa >= 0.0) || !(n_thermal >= 0.0)) throw ArgumentError("heating rate inputs must be non-negative");
  return kappa * n_thermal;
}

double ExperimentPreset::theta() const { return kTwoPi * theta_over_2pi; }

double ExperimentPreset::xi1() const {
  if (!(rabi_ratio > 1.0)) throw ArgumentError("preset needs rabi_ratio > 1");
  return theta() / std::sqrt(rabi_ratio * rabi_ratio - 1.0);
}

double ExperimentPreset::xi2() const { return rabi_ratio * xi1(); }

double ExperimentPreset::collective_coupling_over_2pi() const { return dispersive_ratio * xi1() / kTwoPi; }

bool ExperimentPreset::coupling_in_quoted_range() const {
  const double g = collective_coupling_over_2pi();
  return g >= 40e3 && g <= 400e3;
}

double ExperimentPreset::t_pi() const { return t_pi_from_theta(theta()); }

double ExperimentPreset::epsilon() const { return squeezing_parameter(rabi_ratio); }

double ExperimentPreset::photons_per_mode() const { return photons_at_t_pi(rabi_ratio); }

double ExperimentPreset::theta_over_kappa() const { return theta_over_2pi / kappa_over_2pi; }

double ExperimentPreset::n_thermal() const { return thermal_occupation(hyperfine_freq, temperature); }

double ExperimentPreset::crossover_temperature() const { return cavsq::crossover_temperature(hyperfine_freq); }

double ExperimentPreset::heating_rate_over_2pi() const { return heating_rate(kappa_over_2pi, n_thermal()); }

ExperimentPreset rb_preset() { return ExperimentPreset{}; }

}  // namespace cavsq
