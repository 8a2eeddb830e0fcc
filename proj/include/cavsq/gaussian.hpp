#pragma once

#include <span>
#include <vector>

#include "cavsq/couplings.hpp"

namespace cavsq {

/// Cavity and spin damping rates (rad/s, full-width convention: da/dt = ... - kappa/2 a).
struct DecayRates {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double gamma_s = 0.0;
  /// Thermal occupation of the cavity input baths (0 = vacuum inputs).
  double n_thermal = 0.0;

  DecayRates() = default;
  DecayRates(double k1, double k2, double gs = 0.0, double nth = 0.0);
  static DecayRates shared(double kappa) { return {kappa, kappa}; }
  bool closed() const noexcept { return kappa1 == 0.0 && kappa2 == 0.0 && gamma_s == 0.0; }
};

/// Second moments V_jk = <v_j v_k^dag> for v = (a1, a1^dag, a2, a2^dag, c, c^dag).
struct MomentMatrix {
  Matrix6 v = Matrix6::Zero();
  double t = 0.0;

  static MomentMatrix vacuum();
  /// Two-mode squeezed vacuum of the cavities at ratio r, spin in vacuum.
  static MomentMatrix two_mode_squeezed(double r);
};

/// Indices into the operator vector v.
enum MomentIndex : int { kA1 = 0, kA1Dag = 1, kA2 = 2, kA2Dag = 3, kC = 4, kCDag = 5 };

/// M with d<v>/dt = M <v> under the effective Hamiltonian plus damping.
Matrix6 drift_matrix(const Couplings& c, const DecayRates& d);

/// Input-noise diffusion for the <v v^dag> ordering.
Matrix6 diffusion_matrix(const DecayRates& d);

struct MomentOptions {
  bool force_runge_kutta = false;
  double condition_limit = 1e8;
  double rk_tolerance = 1e-10;
  double psd_tolerance = 1e-10;
};

/// Solves dV/dt = M V + V M^dag + D from V0 at t = 0 for each (ascending, non-negative) sample time.
std::vector<MomentMatrix> evolve_moments(const Matrix6& drift, const Matrix6& diffusion, const MomentMatrix& v0,
                                         std::span<const double> times, const MomentOptions& options = {});

/// Closed evolution (D = 0).
std::vector<MomentMatrix> evolve_moments(const Matrix6& drift, const MomentMatrix& v0, std::span<const double> times,
                                         const MomentOptions& options = {});

Occupations occupations_from_moments(const MomentMatrix& m);

/// Var(n1 - n2) / (n1 + n2) via the zero-mean Gaussian (Wick) factorization:
///   Var(n1 - n2) = n1^2 + n1 + |<a1 a1>|^2 + n2^2 + n2 + |<a2 a2>|^2
///                  - 2 |<a1 a2>|^2 - 2 |<a1^dag a2>|^2.
double zeta12_from_moments(const MomentMatrix& m);

/// max_i |<[b_i, b_i^dag]> - 1| over the three modes, read from V.
double commutator_defect(const MomentMatrix& m);

/// Symmetrized covariance 1/2 <v v^dag + v^dag v> = V - diag(1,-1,1,-1,1,-1)/2.
Matrix6 symmetrized_covariance(const MomentMatrix& m);

}  // namespace cavsq
