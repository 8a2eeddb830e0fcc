#include <doctest.h>

#include <cmath>

#include "cavsq/analytic.hpp"
#include "cavsq/errors.hpp"
#include "cavsq/feasibility.hpp"

using namespace cavsq;

TEST_CASE("thermal occupation") {
  const double f = 6.83e9;
  const double x = PhysicalConstants::planck_reduced * kTwoPi * f / PhysicalConstants::boltzmann;
  CHECK(thermal_occupation(f, x / std::log(2.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(thermal_occupation(f, 0.0) == 0.0);
  CHECK(thermal_occupation(f, 0.1) == doctest::Approx(0.039186).epsilon(1e-4));
  CHECK(std::abs(thermal_occupation(f, 0.1) / 0.038 - 1.0) < 0.05);
  double last = 0.0;
  for (double t = 0.01; t < 2.0; t *= 1.3) {
    const double n = thermal_occupation(f, t);
    CHECK(n > last);
    last = n;
  }
  CHECK_THROWS_AS(thermal_occupation(-1.0, 0.1), ArgumentError);
}

TEST_CASE("crossover temperature") {
  CHECK(crossover_temperature(6.83e9) == doctest::Approx(0.32779).epsilon(1e-4));
}

TEST_CASE("loss rates") {
  // g/2pi = 10 kHz, N = 1e4, gamma_a/2pi = 6 MHz
  const double g = kTwoPi * 10e3;
  const double gam = kTwoPi * 6e6;
  CHECK(absorption_rate(g, 1e4, gam) / kTwoPi == doctest::Approx(1.6667e5).epsilon(1e-3));
  CHECK(thermal_suppression(1.0, 0.0) == 1.0);
  CHECK(thermal_suppression(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(thermal_suppression(1.0, 9.0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(thermal_suppression(0.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(thermal_suppression(1.0, -1.0), ArgumentError);
  CHECK(heating_rate(2.0, 0.25) == 0.5);
}

TEST_CASE("Rb preset") {
  const ExperimentPreset p = rb_preset();
  CHECK(p.t_pi() == doctest::Approx(50e-6).epsilon(1e-12));
  CHECK(p.epsilon() == doctest::Approx(3.0445).epsilon(1e-4));
  CHECK(p.photons_per_mode() == doctest::Approx(109.75).epsilon(1e-4));
  CHECK(std::sinh(p.epsilon()) * std::sinh(p.epsilon()) == doctest::Approx(p.photons_per_mode()).epsilon(1e-10));
  CHECK(std::abs(p.xi2() / p.xi1()) == doctest::Approx(1.1));
  CHECK(std::sqrt(p.xi2() * p.xi2() - p.xi1() * p.xi1()) == doctest::Approx(p.theta()));
  CHECK(p.theta_over_kappa() == doctest::Approx(10.0 / 7.0));
  CHECK(p.n_thermal() == doctest::Approx(0.039186).epsilon(1e-4));
  CHECK(p.heating_rate_over_2pi() == doctest::Approx(274.3).epsilon(1e-3));
  CHECK(p.collective_coupling_over_2pi() == doctest::Approx(218.2e3).epsilon(1e-3));
  CHECK(p.coupling_in_quoted_range());
}
