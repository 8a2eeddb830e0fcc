#include "cavsq/analytic.hpp"

#include <cmath>
#include <string>

#include "cavsq/effective.hpp"
#include "cavsq/errors.hpp"

namespace cavsq {

Occupations occupations_closed_form(const EffectiveCouplings& c, double t) {
  const double th = c.theta();
  const double x1 = std::norm(c.xi1());
  const double x2 = std::norm(c.xi2());
  const double cm1 = std::cos(th * t) - 1.0;
  const double s = std::sin(th * t);
  Occupations n;
  n.n2 = x1 * x2 / (th * th * th * th) * cm1 * cm1;
  n.n3 = x1 / (th * th) * s * s;
  n.n1 = n.n2 + n.n3;
  return n;
}

double zeta12_closed_form(const EffectiveCouplings& c, double t) {
  const Occupations n = occupations_closed_form(c, t);
  const double denom = n.n1 + n.n2;
  if (denom < 1e-14) return 1.0;
  return n.n3 * (1.0 + n.n3) / denom;
}

PropagatorAmplitudes propagator_amplitudes(const EffectiveCouplings& c, double t) {
  const double th = c.theta();
  const Occupations n = occupations_closed_form(c, t);
  const double root = std::sqrt(1.0 + n.n1);
  PropagatorAmplitudes p;
  p.t = t;
  p.exp_alpha4 = 1.0 / root;
  p.alpha1 = c.xi1() * (std::sin(th * t) / (th * root));
  p.alpha2 = c.xi1() * c.xi2() * ((1.0 - std::cos(th * t)) / (th * th * root));
  return p;
}

AmplitudeTable::AmplitudeTable(int m_max, int n_max) : m_max_(m_max), n_max_(n_max) {
  if (m_max < 0 || n_max < 0) throw ArgumentError("amplitude cutoffs must be non-negative");
  data_.assign(static_cast<std::size_t>(m_max + 1) * static_cast<std::size_t>(n_max + 1), cplx(0.0));
}

std::size_t AmplitudeTable::index(int m, int n) const {
  if (m < 0 || m > m_max_ || n < 0 || n > n_max_) throw ArgumentError("amplitude index outside table");
  return static_cast<std::size_t>(m) * static_cast<std::size_t>(n_max_ + 1) + static_cast<std::size_t>(n);
}

double AmplitudeTable::norm_squared() const {
  double acc = 0.0;
  for (const cplx& a : data_) acc += std::norm(a);
  return acc;
}

FockState AmplitudeTable::to_state(const ModeLayout& layout) const {
  if (layout.num_modes() != 3) throw ArgumentError("expected a three-mode layout");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(layout.composite_dim());
  for (int m = 0; m <= m_max_ && m < layout.dim(kSpin); ++m) {
    for (int n = 0; n <= n_max_ && n < layout.dim(kCavity2) && m + n < layout.dim(kCavity1); ++n) {
      const int occ[3] = {m + n, n, m};
      v[layout.index(occ)] = (*this)(m, n);
    }
  }
  return {layout, std::move(v)};
}

AmplitudeTable evolved_amplitudes(const EffectiveCouplings& c, double t, int m_max, int n_max, double tail_tolerance) {
  const PropagatorAmplitudes p = propagator_amplitudes(c, t);
  AmplitudeTable table(m_max, n_max);
  const double abs1 = std::abs(p.alpha1);
  const double abs2 = std::abs(p.alpha2);
  const double arg1 = std::arg(p.alpha1);
  const double arg2 = std::arg(p.alpha2);
  const double log_prefactor = std::log(p.exp_alpha4);
  for (int m = 0; m <= m_max; ++m) {
    if (m > 0 && abs1 == 0.0) break;
    for (int n = 0; n <= n_max; ++n) {
      if (n > 0 && abs2 == 0.0) break;
      double log_mag = log_prefactor +
                       0.5 * (std::lgamma(m + n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n + 1.0));
      if (m > 0) log_mag += m * std::log(abs1);
      if (n > 0) log_mag += n * std::log(abs2);
      table(m, n) = std::polar(std::exp(log_mag), m * arg1 + n * arg2);
    }
  }
  const double norm2 = table.norm_squared();
  if (norm2 < 1.0 - tail_tolerance) {
    throw CutoffError("amplitude cutoffs (m_max=" + std::to_string(m_max) + ", n_max=" + std::to_string(n_max) +
                      ") leave tail mass " + std::to_string(1.0 - norm2));
  }
  return table;
}

std::vector<double> tmss_amplitudes(double r, int n_max) {
  if (!(r > 1.0)) throw ArgumentError("two-mode squeezed target requires r > 1");
  if (n_max < 0) throw ArgumentError("n_max must be non-negative");
  const double lambda = 2.0 * r / (1.0 + r * r);
  std::vector<double> amps(static_cast<std::size_t>(n_max) + 1);
  double weight = std::abs((1.0 - r * r) / (1.0 + r * r));
  double norm2 = 0.0;
  for (auto& a : amps) {
    a = weight;
    norm2 += a * a;
    weight *= lambda;
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& a : amps) a *= scale;
  return amps;
}

double squeezing_parameter(double r) {
  if (!(r > 1.0)) throw ArgumentError("squeezing parameter requires r > 1");
  return std::atanh(2.0 * r / (1.0 + r * r));
}

double photons_at_t_pi(double r) {
  if (!(r > 1.0)) throw ArgumentError("photon number at T_pi requires r > 1");
  const double d = (r - 1.0) * (r + 1.0);
  return 4.0 * r * r / (d * d);
}

double t_pi(const EffectiveCouplings& c) { return t_pi_from_theta(c.theta()); }

double t_pi_from_theta(double theta) {
  if (!(theta > 0.0)) throw ArgumentError("Theta must be positive");
  return kPi / theta;
}

}  // namespace cavsq
