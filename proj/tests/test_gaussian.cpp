#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cavsq/analytic.hpp"
#include "cavsq/effective.hpp"
#include "cavsq/errors.hpp"
#include "cavsq/gaussian.hpp"

using namespace cavsq;

TEST_CASE("decay rates validation") {
  CHECK_THROWS_AS(DecayRates(-1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(DecayRates(1.0, 1.0, 0.0, -0.1), ArgumentError);
  CHECK(DecayRates{}.closed());
  CHECK_FALSE(DecayRates::shared(0.3).closed());
}

TEST_CASE("drift matrix generates the Heisenberg equations") {
  // i[H, v_j] = sum_k M_jk v_k, checked on states well inside the truncation.
  const ModeLayout l(6, 6, 6);
  const Couplings c{cplx(0.3, 0.4), cplx(-0.7, 0.2)};
  const auto h = build_effective_hamiltonian(c, l);
  const FockOperator v[6] = {mode_annihilator(l, 0), mode_creator(l, 0), mode_annihilator(l, 1),
                             mode_creator(l, 1),     mode_annihilator(l, 2), mode_creator(l, 2)};
  const Matrix6 m = drift_matrix(c, DecayRates{});
  for (int j = 0; j < 6; ++j) {
    FockOperator lhs = cplx(0.0, 1.0) * (h * v[j] - v[j] * h);
    FockOperator rhs = FockOperator::zero(l);
    for (int k = 0; k < 6; ++k) rhs = rhs + m(j, k) * v[k];
    const Eigen::MatrixXcd diff = Eigen::MatrixXcd(lhs.matrix() - rhs.matrix());
    double worst = 0.0;
    for (Eigen::Index col = 0; col < diff.cols(); ++col) {
      const auto occ = l.occupations(col);
      if (*std::max_element(occ.begin(), occ.end()) > 3) continue;
      worst = std::max(worst, diff.col(col).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("closed drift eigenvalues") {
  const auto c = EffectiveCouplings::from_ratio(2.0, 1.5);
  Eigen::ComplexEigenSolver<Matrix6> es(drift_matrix(c, DecayRates{}));
  std::vector<double> im;
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(es.eigenvalues()[i].real()) < 1e-10);
    im.push_back(es.eigenvalues()[i].imag());
  }
  std::sort(im.begin(), im.end());
  const double expected[6] = {-1.5, -1.5, 0.0, 0.0, 1.5, 1.5};
  for (int i = 0; i < 6; ++i) CHECK(im[static_cast<std::size_t>(i)] == doctest::Approx(expected[i]).epsilon(1e-8));
}

TEST_CASE("damping and diffusion") {
  const DecayRates d(0.2, 0.4, 0.1, 0.5);
  const Matrix6 m = drift_matrix(Couplings{}, d);
  CHECK(m(0, 0).real() == doctest::Approx(-0.1));
  CHECK(m(3, 3).real() == doctest::Approx(-0.2));
  CHECK(m(5, 5).real() == doctest::Approx(-0.05));
  const Matrix6 diff = diffusion_matrix(d);
  CHECK(diff(0, 0).real() == doctest::Approx(0.3));
  CHECK(diff(1, 1).real() == doctest::Approx(0.1));
  CHECK(diff(2, 2).real() == doctest::Approx(0.6));
  CHECK(diff(3, 3).real() == doctest::Approx(0.2));
  // Damped vacuum at zero temperature stays vacuum.
  const double times[] = {0.0, 3.0, 30.0};
  const auto out = evolve_moments(m, diffusion_matrix(DecayRates(0.2, 0.4, 0.1)), MomentMatrix::vacuum(), times);
  for (const auto& mm : out) CHECK((mm.v - MomentMatrix::vacuum().v).cwiseAbs().maxCoeff() < 1e-12);
  // Thermal inputs relax the cavities to n_thermal.
  const double late[] = {200.0};
  const auto th = evolve_moments(m, diff, MomentMatrix::vacuum(), late);
  const Occupations o = occupations_from_moments(th.front());
  CHECK(o.n1 == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(o.n2 == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(std::abs(o.n3) < 1e-8);
}

TEST_CASE("zero drift keeps the initial moments") {
  const auto v0 = MomentMatrix::two_mode_squeezed(1.3);
  const double times[] = {0.0, 1.0, 7.0};
  const auto out = evolve_moments(Matrix6::Zero(), v0, times);
  for (const auto& mm : out) CHECK((mm.v - v0.v).cwiseAbs().maxCoeff() == 0.0);
  const double bad[] = {1.0, 0.5};
  CHECK_THROWS_AS(evolve_moments(Matrix6::Zero(), v0, bad), ArgumentError);
}

TEST_CASE("two-mode squeezed moments") {
  const auto v = MomentMatrix::two_mode_squeezed(1.1);
  const Occupations o = occupations_from_moments(v);
  CHECK(o.n1 == doctest::Approx(photons_at_t_pi(1.1)).epsilon(1e-12));
  CHECK(o.n2 == doctest::Approx(o.n1).epsilon(1e-12));
  CHECK(std::abs(zeta12_from_moments(v)) < 1e-9);
  CHECK(commutator_defect(v) < 1e-12);
  CHECK(zeta12_from_moments(MomentMatrix::vacuum()) == 1.0);
  const Matrix6 s = symmetrized_covariance(MomentMatrix::vacuum());
  CHECK(s(0, 0).real() == doctest::Approx(0.5));
  CHECK(s(1, 1).real() == doctest::Approx(0.5));
}

TEST_CASE("exact and Runge-Kutta propagation agree") {
  const auto c = EffectiveCouplings::from_ratio(1.5, 1.0);
  const DecayRates d(0.1, 0.05, 0.02, 0.1);
  std::vector<double> times;
  for (int i = 0; i <= 20; ++i) times.push_back(0.5 * i);
  const auto ex = evolve_moments(drift_matrix(c, d), diffusion_matrix(d), MomentMatrix::vacuum(), times);
  MomentOptions rk;
  rk.force_runge_kutta = true;
  const auto nu = evolve_moments(drift_matrix(c, d), diffusion_matrix(d), MomentMatrix::vacuum(), times, rk);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double scale = std::max(1.0, ex[i].v.cwiseAbs().maxCoeff());
    CHECK((ex[i].v - nu[i].v).cwiseAbs().maxCoeff() / scale < 1e-7);
    CHECK(commutator_defect(ex[i]) < 1e-9);
  }
}

TEST_CASE("closed Gaussian route reproduces the closed forms") {
  for (double r : {1.01, 1.05, 1.1, 2.0}) {
    const auto c = EffectiveCouplings::from_ratio(r, 1.0);
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(2.0 * t_pi(c) * i / 40.0);
    const auto out = evolve_moments(drift_matrix(c, DecayRates{}), MomentMatrix::vacuum(), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const Occupations g = occupations_from_moments(out[i]);
      const Occupations a = occupations_closed_form(c, times[i]);
      const double scale = std::max(1.0, a.n1);
      CHECK(std::abs(g.n1 - a.n1) / scale < 1e-8);
      CHECK(std::abs(g.n2 - a.n2) / scale < 1e-8);
      CHECK(std::abs(g.n3 - a.n3) / scale < 1e-8);
      CHECK(std::abs(zeta12_from_moments(out[i]) - zeta12_closed_form(c, times[i])) < 1e-8);
    }
    CHECK(zeta12_from_moments(out[20]) < 1e-8);
  }
}

TEST_CASE("Wick factorization matches the Fock-space variance") {
  const auto c = EffectiveCouplings::from_ratio(2.0, 1.0);
  const ModeLayout l = recommended_layout(2.0, 1e-10);
  std::vector<double> times;
  for (int i = 0; i <= 12; ++i) times.push_back(2.0 * t_pi(c) * i / 12.0);
  EvolveOptions opt;
  opt.keep_states = false;
  const auto fock = evolve_effective(c, FockState::vacuum(l), times, opt);
  const auto gauss = evolve_moments(drift_matrix(c, DecayRates{}), MomentMatrix::vacuum(), times);
  // The last sample is back at vacuum, where zeta12 is 0/0.
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    CHECK(std::abs(fock.zeta12[i] - zeta12_from_moments(gauss[i])) < 1e-6);
  }
}

TEST_CASE("random quadratic evolution stays physical") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Couplings c{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
    const DecayRates d(std::abs(u(rng)), std::abs(u(rng)), std::abs(u(rng)), std::abs(u(rng)));
    const double times[] = {0.0, 0.3, 1.1, 2.5};
    const auto out = evolve_moments(drift_matrix(c, d), diffusion_matrix(d), MomentMatrix::vacuum(), times);
    for (const auto& mm : out) {
      CHECK((mm.v - mm.v.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(commutator_defect(mm) < 1e-9);
      const Occupations o = occupations_from_moments(mm);
      CHECK(o.n1 >= 0.0);
      CHECK(o.n2 >= 0.0);
      CHECK(o.n3 >= 0.0);
    }
  }
}
