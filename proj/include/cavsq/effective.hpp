#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cavsq/couplings.hpp"
#include "cavsq/fock.hpp"

namespace cavsq {

/// Mode indices of the three-mode layout.
inline constexpr std::size_t kCavity1 = 0;
inline constexpr std::size_t kCavity2 = 1;
inline constexpr std::size_t kSpin = 2;

FockOperator build_effective_hamiltonian(const Couplings& c, const ModeLayout& layout);

/// N = a2^dag a2 - a1^dag a1 + c^dag c, conserved by the effective Hamiltonian.
FockOperator conserved_charge(const ModeLayout& layout);

struct EvolveOptions {
  /// Upper bound on a single Krylov step (s); <= 0 picks 0.01 / ||H||_1.
  double max_step = 0.0;
  double krylov_tolerance = 1e-10;
  int krylov_max_dim = 40;
  /// Composite dimensions up to this use a dense eigendecomposition.
  Eigen::Index dense_limit = 4096;
  double leakage_threshold = 1e-6;
  double norm_tolerance = 1e-8;
  bool keep_states = true;
  /// Called for every sample in order, before the state is (optionally) stored.
  std::function<void(std::size_t, double, const FockState&)> observer;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<FockState> states;  // empty when keep_states is false
  std::vector<Occupations> occupations;
  std::vector<double> zeta12;
  std::vector<double> leakage;
  std::vector<double> norm;
  bool truncation_warning = false;
  std::vector<std::string> warnings;
};

/// |psi(t)> = exp(-iHt)|psi0> at each sample. Times must be ascending from 0.
Trajectory evolve_state(const FockOperator& hamiltonian, const FockState& psi0, std::span<const double> times,
                        const EvolveOptions& options = {});

/// Evolution under the effective Hamiltonian with the Krylov step fixed at Theta dt = 0.01.
Trajectory evolve_effective(const EffectiveCouplings& c, const FockState& psi0, std::span<const double> times,
                            EvolveOptions options = {});

/// zeta12 = Var(n1 - n2) / (<n1> + <n2>); returns 1 when the denominator is below 1e-14.
double relative_number_squeezing(const FockState& state);

/// |<target|state>|^2 with the magnitude-normalized two-mode squeezed target times spin vacuum.
double fidelity_with_target(const FockState& state, double r);

/// Max elementwise |a - e^{i phi} b| with phi aligning the largest-magnitude amplitude of a.
double phase_gauged_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

/// Layout whose truncation tails stay below `tail` for the dynamics at ratio r.
ModeLayout recommended_layout(double r, double tail = 1e-10);

/// Minimum over phi of Var((a e^{-i phi} + a^dag e^{i phi}) / sqrt 2) after evolving the
/// degenerate-cavity Hamiltonian H = i xi1 a^dag c^dag + i xi2 a^dag c + h.c. from vacuum.
/// `two_mode` is the (cavity, spin) layout. Vacuum level is 1/2.
double degenerate_mode_evolve(const Couplings& c, const ModeLayout& two_mode, double t, int phase_samples,
                              const EvolveOptions& options = {});

}  // namespace cavsq
