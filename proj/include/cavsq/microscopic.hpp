#pragma once

#include <utility>
#include <vector>

#include "cavsq/fock.hpp"

namespace cavsq {

/// Parameters of the driven four-level Raman scheme (all rates rad/s).
struct RamanConfig {
  cplx omega1_rabi{0.0, 0.0};
  cplx omega2_rabi{0.0, 0.0};
  cplx g1{0.0, 0.0};
  cplx g2{0.0, 0.0};
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta_two_photon = 0.0;
  int n_atoms = 1;
  int excitation_cap = 2;

  /// min(|D1|, |D2|, |D1 - D2|) / max(|W1|, |W2|, |g1|, |g2|); infinite when nothing is driven.
  double dispersive_ratio() const;

  /// W1 = g1 = g2 = G, W2 = r G, D1 = ratio r G, D2 = -ratio r G, so the ratio above equals `ratio`
  /// and |beta2 / beta1| = r.
  static RamanConfig dispersive(double ratio, double r = 1.1, double coupling = 1.0, int n_atoms = 1,
                                int excitation_cap = 2);
};

enum class Level : int { G = 0, H = 1, E1 = 2, E2 = 3 };

/// Atoms (4 levels each) times two cavity modes, restricted to ground-manifold states with
/// n1 + n2 + #h <= cap plus every intermediate state one dipole step away from them.
///
/// States live on the product layout {4, ..., 4, cap + 1, cap + 1}; amplitudes outside the
/// retained set are never populated by the Hamiltonians built here.
class AtomicBasis {
 public:
  AtomicBasis(int n_atoms, int excitation_cap);

  int n_atoms() const noexcept { return n_atoms_; }
  int excitation_cap() const noexcept { return cap_; }
  const ModeLayout& layout() const noexcept { return layout_; }
  std::size_t cavity1_mode() const noexcept { return static_cast<std::size_t>(n_atoms_); }
  std::size_t cavity2_mode() const noexcept { return static_cast<std::size_t>(n_atoms_) + 1; }

  /// Retained product indices, ascending.
  const std::vector<Eigen::Index>& states() const noexcept { return states_; }
  /// Retained ground-manifold indices, ascending.
  const std::vector<Eigen::Index>& ground_states() const noexcept { return ground_; }
  bool contains(Eigen::Index product_index) const;

  Level level(Eigen::Index product_index, int atom) const;
  Eigen::Index index(std::span<const Level> levels, int n1, int n2) const;

  /// All atoms in g, both cavities empty.
  FockState initial_state() const;

 private:
  int n_atoms_;
  int cap_;
  ModeLayout layout_;
  std::vector<Eigen::Index> states_;
  std::vector<Eigen::Index> ground_;
  std::vector<char> retained_;
};

/// Interaction-picture Hamiltonian of the driven scheme at time t, Hermitian-completed.
FockOperator build_full_hamiltonian(const RamanConfig& cfg, const AtomicBasis& basis, double t);

/// (beta1, beta2) with beta_i = sqrt(N) W_i^* g_i / D_i.
std::pair<cplx, cplx> effective_couplings(const RamanConfig& cfg);

/// Second-order effective Hamiltonian on the ground manifold at time t:
///   -sum_{m,n} (1/D_m + 1/D_n)/2  P A_n^dag A_m P  e^{i (D_m - D_n) t}
/// over the raising parts A_k e^{i D_k t} of the full Hamiltonian. The m = n terms are the
/// light shifts; they are dropped when `light_shifts` is false.
FockOperator effective_ground_hamiltonian(const RamanConfig& cfg, const AtomicBasis& basis, double t = 0.0,
                                          bool light_shifts = true);

struct AdiabaticReport {
  double max_occupation_deviation = 0.0;
  double max_intermediate_population = 0.0;
  /// Same comparison against the effective model with light shifts removed.
  double bare_occupation_deviation = 0.0;
  double max_norm_drift = 0.0;
  double peak_occupation = 0.0;
  double dispersive_ratio = 0.0;
  long steps = 0;
};

/// pi / Theta of the effective couplings, Theta = sqrt(|beta2|^2 - |beta1|^2).
double effective_t_pi(const RamanConfig& cfg);

/// Integrates the full model (RK4) and the effective model from all-g vacuum over [0, horizon]
/// and compares n1, n2 and the h population at `samples` equally spaced times.
AdiabaticReport adiabatic_error(const RamanConfig& cfg, double horizon, int samples);

/// |<[c, c^dag]> - 1| with c = N^-1/2 sum_j |g_j><h_j|, i.e. |<(1/N) sum_j (P_g - P_h)> - 1|.
double bosonization_residual(const AtomicBasis& basis, const FockState& state);

}  // namespace cavsq
