#include "cavsq/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "cavsq/errors.hpp"

namespace cavsq {

namespace {

// (e^{z t} - 1) / z, continuous at z = 0.
cplx integrated_exponential(cplx z, double t) {
  const cplx zt = z * t;
  if (std::abs(zt) < 1e-3) {
    return t * (1.0 + zt / 2.0 + zt * zt / 6.0 + zt * zt * zt / 24.0 + zt * zt * zt * zt / 120.0);
  }
  return (std::exp(zt) - 1.0) / z;
}

Matrix6 hermitize(const Matrix6& v) { return 0.5 * (v + v.adjoint()); }

void check_psd(const Matrix6& v, double tol, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix6> es(v, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -tol * scale) {
    std::ostringstream msg;
    msg << "moment matrix lost positive semidefiniteness at t = " << t << " (min eigenvalue "
        << es.eigenvalues().minCoeff() << ")";
    throw NumericalError(msg.str());
  }
}

class EigenPropagator {
 public:
  EigenPropagator(const Matrix6& drift, const Matrix6& diffusion, const Matrix6& v0) {
    Eigen::ComplexEigenSolver<Matrix6> es(drift);
    if (es.info() != Eigen::Success) return;
    s_ = es.eigenvectors();
    lambda_ = es.eigenvalues();
    Eigen::JacobiSVD<Matrix6> svd(s_);
    const auto sv = svd.singularValues();
    condition_ = sv(5) > 0.0 ? sv(0) / sv(5) : std::numeric_limits<double>::infinity();
    if (!std::isfinite(condition_)) return;
    const Matrix6 s_inv = s_.inverse();
    v0_modal_ = s_inv * v0 * s_inv.adjoint();
    d_modal_ = s_inv * diffusion * s_inv.adjoint();
  }

  double condition() const noexcept { return condition_; }

  Matrix6 at(double t) const {
    Matrix6 modal;
    for (int j = 0; j < 6; ++j) {
      const cplx ej = std::exp(lambda_[j] * t);
      for (int k = 0; k < 6; ++k) {
        const cplx ek = std::exp(lambda_[k] * t);
        modal(j, k) = ej * v0_modal_(j, k) * std::conj(ek) +
                      d_modal_(j, k) * integrated_exponential(lambda_[j] + std::conj(lambda_[k]), t);
      }
    }
    return s_ * modal * s_.adjoint();
  }

 private:
  Matrix6 s_ = Matrix6::Identity();
  Eigen::Matrix<cplx, 6, 1> lambda_ = Eigen::Matrix<cplx, 6, 1>::Zero();
  Matrix6 v0_modal_ = Matrix6::Zero();
  Matrix6 d_modal_ = Matrix6::Zero();
  double condition_ = std::numeric_limits<double>::infinity();
};

// Dormand-Prince 5(4) on the Lyapunov equation.
class RungeKuttaPropagator {
 public:
  RungeKuttaPropagator(const Matrix6& drift, const Matrix6& diffusion, double tol)
      : m_(drift), d_(diffusion), tol_(tol) {}

  void advance(Matrix6& v, double t0, double t1) {
    double t = t0;
    if (h_ <= 0.0) h_ = std::max(1e-6 * std::abs(t1 - t0), 1e-3 / (m_.cwiseAbs().maxCoeff() + 1e-300));
    while (t1 - t > 1e-15 * std::max(1.0, std::abs(t1))) {
      const double h = std::min(h_, t1 - t);
      const Matrix6 k1 = rhs(v);
      const Matrix6 k2 = rhs(v + h * (1.0 / 5) * k1);
      const Matrix6 k3 = rhs(v + h * (3.0 / 40 * k1 + 9.0 / 40 * k2));
      const Matrix6 k4 = rhs(v + h * (44.0 / 45 * k1 - 56.0 / 15 * k2 + 32.0 / 9 * k3));
      const Matrix6 k5 = rhs(v + h * (19372.0 / 6561 * k1 - 25360.0 / 2187 * k2 + 64448.0 / 6561 * k3 -
                                      212.0 / 729 * k4));
      const Matrix6 k6 = rhs(v + h * (9017.0 / 3168 * k1 - 355.0 / 33 * k2 + 46732.0 / 5247 * k3 +
                                      49.0 / 176 * k4 - 5103.0 / 18656 * k5));
      const Matrix6 y5 =
          v + h * (35.0 / 384 * k1 + 500.0 / 1113 * k3 + 125.0 / 192 * k4 - 2187.0 / 6784 * k5 + 11.0 / 84 * k6);
      const Matrix6 k7 = rhs(y5);
      const Matrix6 y4 = v + h * (5179.0 / 57600 * k1 + 7571.0 / 16695 * k3 + 393.0 / 640 * k4 -
                                  92097.0 / 339200 * k5 + 187.0 / 2100 * k6 + 1.0 / 40 * k7);
      const double scale = std::max(1.0, y5.cwiseAbs().maxCoeff());
      const double err = (y5 - y4).cwiseAbs().maxCoeff() / (tol_ * scale);
      if (err <= 1.0) {
        v = y5;
        t += h;
      }
      const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h_ = h * std::clamp(factor, 0.2, 5.0);
      if (h_ < 1e-14 * std::max(1.0, std::abs(t1))) throw NumericalError("adaptive Runge-Kutta step underflow");
    }
  }

 private:
  Matrix6 rhs(const Matrix6& v) const { return m_ * v + v * m_.adjoint() + d_; }

  Matrix6 m_;
  Matrix6 d_;
  double tol_;
  double h_ = 0.0;
};

}  // namespace

DecayRates::DecayRates(double k1, double k2, double gs, double nth) : kappa1(k1), kappa2(k2), gamma_s(gs), n_thermal(nth) {
  if (!(k1 >= 0.0) || !(k2 >= 0.0) || !(gs >= 0.0) || !(nth >= 0.0)) {
    throw ArgumentError("decay rates and thermal occupation must be non-negative");
  }
}

MomentMatrix MomentMatrix::vacuum() {
  MomentMatrix m;
  m.v(kA1, kA1) = 1.0;
  m.v(kA2, kA2) = 1.0;
  m.v(kC, kC) = 1.0;
  return m;
}

MomentMatrix MomentMatrix::two_mode_squeezed(double r) {
  if (!(r > 1.0)) throw ArgumentError("two-mode squeezed moments require r > 1");
  const double lambda = 2.0 * r / (1.0 + r * r);
  const double denom = 1.0 - lambda * lambda;
  const double n = lambda * lambda / denom;
  const double corr = lambda / denom;
  MomentMatrix m = vacuum();
  m.v(kA1, kA1) = n + 1.0;
  m.v(kA1Dag, kA1Dag) = n;
  m.v(kA2, kA2) = n + 1.0;
  m.v(kA2Dag, kA2Dag) = n;
  m.v(kA1, kA2Dag) = corr;  // <a1 a2>
  m.v(kA2Dag, kA1) = corr;
  m.v(kA1Dag, kA2) = corr;  // <a1^dag a2^dag>
  m.v(kA2, kA1Dag) = corr;
  return m;
}

Matrix6 drift_matrix(const Couplings& c, const DecayRates& d) {
  Matrix6 m = Matrix6::Zero();
  m(kA1, kCDag) = c.xi1;
  m(kA1Dag, kC) = std::conj(c.xi1);
  m(kA2, kC) = c.xi2;
  m(kA2Dag, kCDag) = std::conj(c.xi2);
  m(kC, kA1Dag) = c.xi1;
  m(kC, kA2) = -std::conj(c.xi2);
  m(kCDag, kA1) = std::conj(c.xi1);
  m(kCDag, kA2Dag) = -c.xi2;
  m(kA1, kA1) = m(kA1Dag, kA1Dag) = -0.5 * d.kappa1;
  m(kA2, kA2) = m(kA2Dag, kA2Dag) = -0.5 * d.kappa2;
  m(kC, kC) = m(kCDag, kCDag) = -0.5 * d.gamma_s;
  return m;
}

Matrix6 diffusion_matrix(const DecayRates& d) {
  Matrix6 m = Matrix6::Zero();
  m(kA1, kA1) = d.kappa1 * (d.n_thermal + 1.0);
  m(kA1Dag, kA1Dag) = d.kappa1 * d.n_thermal;
  m(kA2, kA2) = d.kappa2 * (d.n_thermal + 1.0);
  m(kA2Dag, kA2Dag) = d.kappa2 * d.n_thermal;
  m(kC, kC) = d.gamma_s;
  return m;
}

std::vector<MomentMatrix> evolve_moments(const Matrix6& drift, const Matrix6& diffusion, const MomentMatrix& v0,
                                         std::span<const double> times, const MomentOptions& options) {
  if (!std::is_sorted(times.begin(), times.end())) throw ArgumentError("sample times must be ascending");
  if (!times.empty() && times.front() < 0.0) throw ArgumentError("sample times must be non-negative");
  std::vector<MomentMatrix> out;
  out.reserve(times.size());

  std::optional<EigenPropagator> exact;
  if (!options.force_runge_kutta) {
    exact.emplace(drift, diffusion, v0.v);
    if (!(exact->condition() < options.condition_limit)) exact.reset();
  }
  RungeKuttaPropagator rk(drift, diffusion, options.rk_tolerance);
  Matrix6 current = v0.v;
  double now = 0.0;
  for (const double t : times) {
    Matrix6 v;
    if (t == 0.0) {
      v = v0.v;
    } else if (exact) {
      v = exact->at(t);
    } else {
      rk.advance(current, now, t);
      now = t;
      v = current;
    }
    v = hermitize(v);
    check_psd(v, options.psd_tolerance, t);
    out.push_back({v, t});
  }
  return out;
}

std::vector<MomentMatrix> evolve_moments(const Matrix6& drift, const MomentMatrix& v0, std::span<const double> times,
                                         const MomentOptions& options) {
  return evolve_moments(drift, Matrix6::Zero(), v0, times, options);
}

Occupations occupations_from_moments(const MomentMatrix& m) {
  const double n[3] = {m.v(kA1Dag, kA1Dag).real(), m.v(kA2Dag, kA2Dag).real(), m.v(kCDag, kCDag).real()};
  for (double x : n) {
    if (x < -1e-10) throw NumericalError("negative occupation read from moment matrix");
  }
  return {std::max(0.0, n[0]), std::max(0.0, n[1]), std::max(0.0, n[2])};
}

double zeta12_from_moments(const MomentMatrix& m) {
  const Occupations occ = occupations_from_moments(m);
  const double denom = occ.n1 + occ.n2;
  if (denom < 1e-14) return 1.0;
  const double var = occ.n1 * occ.n1 + occ.n1 + std::norm(m.v(kA1, kA1Dag)) + occ.n2 * occ.n2 + occ.n2 +
                     std::norm(m.v(kA2, kA2Dag)) - 2.0 * std::norm(m.v(kA1, kA2Dag)) -
                     2.0 * std::norm(m.v(kA1Dag, kA2Dag));
  return std::max(0.0, var) / denom;
}

double commutator_defect(const MomentMatrix& m) {
  double worst = 0.0;
  for (int mode = 0; mode < 3; ++mode) {
    const int a = 2 * mode;
    worst = std::max(worst, std::abs(m.v(a, a) - m.v(a + 1, a + 1) - 1.0));
  }
  return worst;
}

Matrix6 symmetrized_covariance(const MomentMatrix& m) {
  Matrix6 c = m.v;
  for (int j = 0; j < 6; ++j) c(j, j) -= (j % 2 == 0 ? 0.5 : -0.5);
  return c;
}

}  // namespace cavsq
