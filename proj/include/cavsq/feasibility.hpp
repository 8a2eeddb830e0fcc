#pragma once

namespace cavsq {

struct PhysicalConstants {
  static constexpr double planck_reduced = 1.05457182e-34;  // J s
  static constexpr double boltzmann = 1.38064900e-23;       // J / K
};

/// Bose occupation [exp(hbar w / kB T) - 1]^-1 of a mode at `frequency` (Hz) and `temperature` (K).
double thermal_occupation(double frequency, double temperature);

/// Temperature (K) at which hbar w = kB T for a mode at `frequency` (Hz).
double crossover_temperature(double frequency);

/// Photon absorption rate g^2 N / gamma_a (rad/s).
double absorption_rate(double g_single, double n_atoms, double gamma_a);

/// kappa / (gamma_c + kappa).
double thermal_suppression(double kappa, double gamma_c);

/// kappa n_T (rad/s).
double heating_rate(double kappa, double n_thermal);

/// Rb stripline parameters. Only the primaries are stored; everything else is computed on access.
///
/// Theta is pinned and the collective coupling is solved from it, with W1 ~ G and
/// Delta = dispersive_ratio * G, so that |beta1| = G / dispersive_ratio = |xi1|.
class ExperimentPreset {
 public:
  double theta_over_2pi = 10e3;       // Hz
  double rabi_ratio = 1.1;            // r = |xi2 / xi1|
  double dispersive_ratio = 10.0;     // Delta / G
  double kappa_over_2pi = 7e3;        // Hz
  double hyperfine_freq = 6.83e9;     // Hz
  double temperature = 0.1;           // K

  double theta() const;  // rad/s
  double xi1() const;    // rad/s
  double xi2() const;    // rad/s
  double collective_coupling_over_2pi() const;
  bool coupling_in_quoted_range() const;
  double t_pi() const;
  double epsilon() const;
  double photons_per_mode() const;
  double theta_over_kappa() const;
  double n_thermal() const;
  double crossover_temperature() const;
  double heating_rate_over_2pi() const;
};

ExperimentPreset rb_preset();

}  // namespace cavsq
