#include "cavsq/effective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cavsq/analytic.hpp"
#include "cavsq/errors.hpp"

namespace cavsq {

namespace {

void require_three_modes(const ModeLayout& layout) {
  if (layout.num_modes() != 3) throw ArgumentError("expected a (cavity 1, cavity 2, spin) layout");
}

double one_norm(const SparseMatrix& h) {
  double best = 0.0;
  for (int k = 0; k < h.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

// Exact propagation through the eigenbasis of a dense Hermitian matrix.
class DensePropagator {
 public:
  DensePropagator(const SparseMatrix& h, const Eigen::VectorXcd& psi0) {
    Eigen::MatrixXcd dense = Eigen::MatrixXcd(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
    vectors_ = es.eigenvectors();
    values_ = es.eigenvalues();
    coeffs_ = vectors_.adjoint() * psi0;
  }

  Eigen::VectorXcd at(double t) const {
    Eigen::VectorXcd phased(coeffs_.size());
    for (Eigen::Index k = 0; k < coeffs_.size(); ++k) phased[k] = std::exp(-kI * values_[k] * t) * coeffs_[k];
    return vectors_ * phased;
  }

 private:
  Eigen::MatrixXcd vectors_;
  Eigen::VectorXd values_;
  Eigen::VectorXcd coeffs_;
};

// Short-time Lanczos propagator with full reorthogonalization.
class KrylovPropagator {
 public:
  KrylovPropagator(const SparseMatrix& h, double tol, int max_dim)
      : h_(h), tol_(tol), max_dim_(std::max(max_dim, 2)), basis_(h.rows(), max_dim_ + 1) {}

  // Advances psi by at most dt; returns the step actually taken.
  double step(Eigen::VectorXcd& psi, double dt) {
    const double beta0 = psi.norm();
    if (beta0 == 0.0) return dt;
    basis_.col(0) = psi / beta0;
    std::vector<double> alpha;
    std::vector<double> beta;
    int m = 0;
    bool exact = false;
    Eigen::VectorXcd w(h_.rows());
    for (int j = 0; j < max_dim_; ++j) {
      w.noalias() = h_ * basis_.col(j);
      alpha.push_back(basis_.col(j).dot(w).real());
      w -= alpha.back() * basis_.col(j);
      if (j > 0) w -= beta.back() * basis_.col(j - 1);
      for (int i = 0; i <= j; ++i) w -= basis_.col(i) * basis_.col(i).dot(w);
      const double b = w.norm();
      m = j + 1;
      if (b < 1e-13 * (std::abs(alpha.back()) + 1.0)) {
        exact = true;
        break;
      }
      beta.push_back(b);
      if (m >= 2 && error_estimate(alpha, beta, m, dt) < tol_) break;
      basis_.col(j + 1) = w / b;
    }
    if (!exact) {
      while (error_estimate(alpha, beta, m, dt) >= tol_) {
        dt *= 0.5;
        if (dt < 1e-300) throw NumericalError("Krylov step size underflow");
      }
    }
    const Eigen::VectorXcd y = small_exponential(alpha, beta, m, dt);
    psi = beta0 * (basis_.leftCols(m) * y);
    return dt;
  }

 private:
  static Eigen::MatrixXd tridiagonal(const std::vector<double>& alpha, const std::vector<double>& beta, int m) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    return t;
  }

  static Eigen::VectorXcd small_exponential(const std::vector<double>& alpha, const std::vector<double>& beta, int m,
                                            double dt) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiagonal(alpha, beta, m));
    const Eigen::MatrixXd& q = es.eigenvectors();
    Eigen::VectorXcd phased(m);
    for (int k = 0; k < m; ++k) phased[k] = std::exp(-kI * es.eigenvalues()[k] * dt) * q(0, k);
    return q.cast<cplx>() * phased;
  }

  static double error_estimate(const std::vector<double>& alpha, const std::vector<double>& beta, int m, double dt) {
    const Eigen::VectorXcd y = small_exponential(alpha, beta, m, dt);
    return beta[m - 1] * std::abs(y[m - 1]);
  }

  const SparseMatrix& h_;
  double tol_;
  int max_dim_;
  Eigen::MatrixXcd basis_;
};

void record_sample(Trajectory& traj, std::size_t idx, double t, const FockState& state, const EvolveOptions& opt) {
  const auto& layout = state.layout();
  traj.times.push_back(t);
  const double leak = top_level_population(state);
  traj.leakage.push_back(leak);
  traj.norm.push_back(state.norm());
  if (layout.num_modes() == 3) {
    traj.occupations.push_back(
        {mean_occupation(state, kCavity1), mean_occupation(state, kCavity2), mean_occupation(state, kSpin)});
    traj.zeta12.push_back(relative_number_squeezing(state));
  }
  if (leak > opt.leakage_threshold && !traj.truncation_warning) {
    traj.truncation_warning = true;
    std::ostringstream msg;
    msg << "top Fock level population " << leak << " exceeds " << opt.leakage_threshold << " at t = " << t;
    traj.warnings.push_back(msg.str());
  }
  if (opt.observer) opt.observer(idx, t, state);
  if (opt.keep_states) traj.states.push_back(state);
}

}  // namespace

FockOperator build_effective_hamiltonian(const Couplings& c, const ModeLayout& layout) {
  require_three_modes(layout);
  const auto a1 = mode_annihilator(layout, kCavity1);
  const auto a2 = mode_annihilator(layout, kCavity2);
  const auto s = mode_annihilator(layout, kSpin);
  const auto pair = a1.adjoint() * s.adjoint();
  const auto swap = a2.adjoint() * s;
  const FockOperator h1 = (kI * c.xi1) * pair + (-kI * std::conj(c.xi1)) * pair.adjoint();
  const FockOperator h2 = (kI * c.xi2) * swap + (-kI * std::conj(c.xi2)) * swap.adjoint();
  return h1 + h2;
}

FockOperator conserved_charge(const ModeLayout& layout) {
  require_three_modes(layout);
  return mode_number(layout, kCavity2) - mode_number(layout, kCavity1) + mode_number(layout, kSpin);
}

Trajectory evolve_state(const FockOperator& hamiltonian, const FockState& psi0, std::span<const double> times,
                        const EvolveOptions& options) {
  if (!(hamiltonian.layout() == psi0.layout())) throw ArgumentError("state and Hamiltonian layouts differ");
  if (times.empty() || times.front() != 0.0) throw ArgumentError("sample times must start at 0");
  if (!std::is_sorted(times.begin(), times.end())) throw ArgumentError("sample times must be ascending");

  Trajectory traj;
  const auto& h = hamiltonian.matrix();
  const auto& layout = psi0.layout();
  const Eigen::Index dim = layout.composite_dim();
  const double norm0 = psi0.norm();

  if (dim <= options.dense_limit) {
    const DensePropagator prop(h, psi0.amplitudes());
    for (std::size_t i = 0; i < times.size(); ++i) {
      FockState state(layout, i == 0 ? psi0.amplitudes() : prop.at(times[i]));
      if (std::abs(state.norm() - norm0) > options.norm_tolerance) {
        throw NumericalError("norm drift beyond tolerance in dense propagation");
      }
      record_sample(traj, i, times[i], state, options);
    }
    return traj;
  }

  const double hnorm = one_norm(h);
  double max_step = options.max_step;
  if (max_step <= 0.0) max_step = hnorm > 0.0 ? 0.01 / hnorm : (times.back() > 0.0 ? times.back() : 1.0);
  KrylovPropagator prop(h, options.krylov_tolerance, options.krylov_max_dim);
  Eigen::VectorXcd psi = psi0.amplitudes();
  double now = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double target = times[i];
    while (target - now > 1e-15 * std::max(1.0, std::abs(target))) {
      const double before = psi.norm();
      const double taken = prop.step(psi, std::min(max_step, target - now));
      if (std::abs(psi.norm() - before) > options.norm_tolerance) {
        throw NumericalError("norm drift beyond tolerance in Krylov step");
      }
      now += taken;
    }
    now = target;
    record_sample(traj, i, target, FockState(layout, psi), options);
  }
  return traj;
}

Trajectory evolve_effective(const EffectiveCouplings& c, const FockState& psi0, std::span<const double> times,
                            EvolveOptions options) {
  if (options.max_step <= 0.0) options.max_step = 0.01 / c.theta();
  return evolve_state(build_effective_hamiltonian(c, psi0.layout()), psi0, times, options);
}

double relative_number_squeezing(const FockState& state) {
  const auto& layout = state.layout();
  if (layout.num_modes() < 2) throw ArgumentError("relative number squeezing needs two cavity modes");
  double mean1 = 0.0, mean2 = 0.0, mean_diff = 0.0, mean_diff2 = 0.0;
  const auto& amps = state.amplitudes();
  for (Eigen::Index k = 0; k < amps.size(); ++k) {
    const double p = std::norm(amps[k]);
    if (p == 0.0) continue;
    const double n1 = layout.occupation(k, kCavity1);
    const double n2 = layout.occupation(k, kCavity2);
    mean1 += p * n1;
    mean2 += p * n2;
    mean_diff += p * (n1 - n2);
    mean_diff2 += p * (n1 - n2) * (n1 - n2);
  }
  const double denom = mean1 + mean2;
  if (denom < 1e-14) return 1.0;
  return std::max(0.0, mean_diff2 - mean_diff * mean_diff) / denom;
}

double fidelity_with_target(const FockState& state, double r) {
  const auto& layout = state.layout();
  require_three_modes(layout);
  const int nmax = std::min(layout.dim(kCavity1), layout.dim(kCavity2)) - 1;
  const std::vector<double> target = tmss_amplitudes(r, nmax);
  cplx overlap = 0.0;
  for (int n = 0; n <= nmax; ++n) {
    const int occ[3] = {n, n, 0};
    overlap += target[static_cast<std::size_t>(n)] * state.amplitudes()[layout.index(occ)];
  }
  return std::min(1.0, std::norm(overlap));
}

double phase_gauged_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (a.size() != b.size()) throw ArgumentError("vectors differ in length");
  if (a.size() == 0) return 0.0;
  Eigen::Index k = 0;
  a.cwiseAbs().maxCoeff(&k);
  cplx phase = 1.0;
  if (std::abs(a[k]) > 0.0 && std::abs(b[k]) > 0.0) {
    phase = (a[k] / std::abs(a[k])) / (b[k] / std::abs(b[k]));
  }
  return (a - phase * b).cwiseAbs().maxCoeff();
}

ModeLayout recommended_layout(double r, double tail) {
  if (!(r > 1.0)) throw ArgumentError("coupling ratio r must exceed 1");
  if (!(tail > 0.0 && tail < 1.0)) throw ArgumentError("tail tolerance must lie in (0, 1)");
  const double q = std::pow(2.0 * r / (1.0 + r * r), 2);
  const double q_spin = 1.0 / (r * r);
  const auto levels = [tail](double ratio) {
    return static_cast<int>(std::ceil(std::log(tail) / std::log(ratio))) + 1;
  };
  const int cavity = std::max(2, levels(q));
  return ModeLayout(cavity, cavity, std::max(2, levels(q_spin)));
}

double degenerate_mode_evolve(const Couplings& c, const ModeLayout& two_mode, double t, int phase_samples,
                              const EvolveOptions& options) {
  if (two_mode.num_modes() != 2) throw ArgumentError("degenerate-mode evolution needs a (cavity, spin) layout");
  if (phase_samples < 1) throw ArgumentError("phase_samples must be positive");
  if (!(t >= 0.0)) throw ArgumentError("time must be non-negative");
  const auto a = mode_annihilator(two_mode, 0);
  const auto s = mode_annihilator(two_mode, 1);
  const auto pair = a.adjoint() * s.adjoint();
  const auto swap = a.adjoint() * s;
  const FockOperator h = (kI * c.xi1) * pair + (-kI * std::conj(c.xi1)) * pair.adjoint() + (kI * c.xi2) * swap +
                         (-kI * std::conj(c.xi2)) * swap.adjoint();
  EvolveOptions opt = options;
  opt.keep_states = true;
  opt.observer = nullptr;
  const double times[] = {0.0, t};
  const auto traj = evolve_state(h, FockState::vacuum(two_mode), std::span<const double>(times, t > 0.0 ? 2 : 1), opt);
  const FockState& psi = traj.states.back();

  const cplx mean_a = expectation(psi, a);
  const cplx mean_aa = expectation(psi, a * a);
  const double mean_n = expectation(psi, a.adjoint() * a).real();
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < phase_samples; ++k) {
    const double phi = kPi * k / phase_samples;
    const cplx rot = std::exp(-kI * phi);
    const double mean_x = std::sqrt(2.0) * (mean_a * rot).real();
    const double mean_x2 = (mean_aa * rot * rot).real() + mean_n + 0.5;
    best = std::min(best, mean_x2 - mean_x * mean_x);
  }
  return best;
}

}  // namespace cavsq
