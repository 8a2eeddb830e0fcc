#include <doctest.h>

#include <cmath>
#include <random>

#include "cavsq/analytic.hpp"
#include "cavsq/errors.hpp"

using namespace cavsq;

TEST_CASE("occupation closed forms") {
  const auto c = EffectiveCouplings::from_ratio(2.0, 1.0);
  const Occupations z = occupations_closed_form(c, 0.0);
  CHECK(z.n1 == 0.0);
  CHECK(z.n3 == 0.0);
  const Occupations p = occupations_closed_form(c, t_pi(c));
  CHECK(p.n1 == doctest::Approx(16.0 / 9.0).epsilon(1e-12));
  CHECK(p.n2 == doctest::Approx(16.0 / 9.0).epsilon(1e-12));
  CHECK(std::abs(p.n3) < 1e-12);
  CHECK(zeta12_closed_form(c, 0.0) == 1.0);
  CHECK(std::abs(zeta12_closed_form(c, t_pi(c))) < 1e-12);
}

TEST_CASE("invariants on a grid of ratios and times") {
  for (int i = 0; i < 20; ++i) {
    const double r = 1.01 + 0.2 * i;
    const auto c = EffectiveCouplings::from_ratio(r, 2.0);
    for (int j = 0; j < 20; ++j) {
      const double t = 2.0 * t_pi(c) * j / 19.0;
      const Occupations o = occupations_closed_form(c, t);
      CHECK(o.n1 >= 0.0);
      CHECK(o.n2 >= 0.0);
      CHECK(o.n3 >= 0.0);
      CHECK(std::abs(o.n1 - o.n2 - o.n3) <= 1e-12 * std::max(1.0, o.n1));
      const auto p = propagator_amplitudes(c, t);
      CHECK(std::norm(p.alpha1) < 1.0);
      CHECK(std::norm(p.alpha1) + std::norm(p.alpha2) < 1.0 + 1e-12);
    }
  }
}

TEST_CASE("amplitude table norm") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ur(1.2, 4.0);
  std::uniform_real_distribution<double> ut(0.0, 2.0);
  for (int k = 0; k < 5; ++k) {
    const auto c = EffectiveCouplings::from_ratio(ur(rng), 1.0);
    const double t = ut(rng) * t_pi(c);
    const auto table = evolved_amplitudes(c, t, 80, 160, 1e-10);
    CHECK(std::abs(table.norm_squared() - 1.0) < 1e-10);
  }
}

TEST_CASE("T_pi column equals the two-mode squeezed state") {
  for (double r : {1.5, 2.0, 3.0}) {
    const auto c = EffectiveCouplings::from_ratio(r, 1.0);
    const auto table = evolved_amplitudes(c, t_pi(c), 4, 300, 1e-10);
    const auto tmss = tmss_amplitudes(r, 300);
    for (int n = 0; n <= 300; ++n) {
      CHECK(std::abs(std::abs(table(0, n)) - tmss[static_cast<std::size_t>(n)]) < 1e-12);
    }
    for (int m = 1; m <= 4; ++m) CHECK(std::abs(table(m, 0)) < 1e-12);
  }
}

TEST_CASE("cutoff errors") {
  const auto c = EffectiveCouplings::from_ratio(1.2, 1.0);
  CHECK_THROWS_AS(evolved_amplitudes(c, t_pi(c), 3, 5, 1e-10), CutoffError);
  CHECK_THROWS_AS(AmplitudeTable(-1, 2), ArgumentError);
}

TEST_CASE("squeezing parameter") {
  for (double r : {1.01, 1.05, 1.1, 2.0, 5.0}) {
    const double e = squeezing_parameter(r);
    CHECK(e == doctest::Approx(std::log((r + 1.0) / (r - 1.0))).epsilon(1e-12));
    CHECK(std::sinh(e) * std::sinh(e) == doctest::Approx(photons_at_t_pi(r)).epsilon(1e-10));
  }
  CHECK(photons_at_t_pi(1.1) == doctest::Approx(109.7505669).epsilon(1e-9));
  CHECK_THROWS_AS(squeezing_parameter(1.0), ArgumentError);
  // Monotone in r: stronger squeezing as r approaches 1.
  CHECK(squeezing_parameter(1.01) > squeezing_parameter(1.05));
  CHECK(squeezing_parameter(1.05) > squeezing_parameter(1.1));
}

TEST_CASE("T_pi") {
  const double theta = kTwoPi * 1.8e3;
  CHECK(t_pi_from_theta(theta) == doctest::Approx(277.78e-6).epsilon(1e-4));
  CHECK(t_pi_from_theta(kTwoPi * 10e3) == doctest::Approx(50e-6).epsilon(1e-12));
  CHECK_THROWS_AS(t_pi_from_theta(0.0), ArgumentError);
}
