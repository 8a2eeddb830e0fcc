#include "cavsq/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "cavsq/errors.hpp"

namespace cavsq {

namespace {

bool spin_decoupled(const Couplings& c, const DecayRates& d) {
  return d.gamma_s == 0.0 && c.xi1 == cplx{} && c.xi2 == cplx{};
}

// Drift, input coupling and input correlations restricted to the active modes.
struct LinearSystem {
  Eigen::MatrixXcd m;
  Eigen::MatrixXcd n;
  Eigen::MatrixXcd p;
  int dim = 6;
};

LinearSystem make_system(const Couplings& c, const DecayRates& d) {
  const Matrix6 drift = drift_matrix(c, d);
  const int dim = spin_decoupled(c, d) ? 4 : 6;
  LinearSystem sys;
  sys.dim = dim;
  sys.m = drift.topLeftCorner(dim, dim);
  sys.n = Eigen::MatrixXcd::Zero(dim, dim);
  sys.p = Eigen::MatrixXcd::Zero(dim, dim);
  const double rates[3] = {d.kappa1, d.kappa2, d.gamma_s};
  const double nth[3] = {d.n_thermal, d.n_thermal, 0.0};
  for (int mode = 0; mode < dim / 2; ++mode) {
    const int a = 2 * mode;
    sys.n(a, a) = sys.n(a + 1, a + 1) = std::sqrt(rates[mode]);
    sys.p(a, a + 1) = nth[mode] + 1.0;  // <a_in(w) a_in^dag(w')>
    sys.p(a + 1, a) = nth[mode];
  }
  return sys;
}

StabilityReport abscissa(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  StabilityReport rep;
  rep.max_real_eigenvalue = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const cplx ev = es.eigenvalues()(i);
    if (ev.real() > rep.max_real_eigenvalue) {
      rep.max_real_eigenvalue = ev.real();
      rep.worst_eigenvalue = ev;
    }
  }
  rep.stable = rep.max_real_eigenvalue < 0.0;
  return rep;
}

void require_stable(const LinearSystem& sys) {
  const StabilityReport rep = abscissa(sys.m);
  if (!rep.stable) {
    std::ostringstream msg;
    msg << "drift matrix is not stable: eigenvalue " << rep.worst_eigenvalue.real() << (rep.worst_eigenvalue.imag() < 0 ? " - " : " + ")
        << std::abs(rep.worst_eigenvalue.imag()) << "i";
    throw StabilityError(msg.str(), rep.worst_eigenvalue);
  }
}

Eigen::MatrixXcd transfer(const LinearSystem& sys, double omega) {
  const Eigen::MatrixXcd a = cplx(0.0, -omega) * Eigen::MatrixXcd::Identity(sys.dim, sys.dim) - sys.m;
  return sys.n * a.partialPivLu().solve(sys.n) - Eigen::MatrixXcd::Identity(sys.dim, sys.dim);
}

Eigen::VectorXcd quadrature(int dim, bool plus) {
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(dim);
  const double h = 1.0 / std::sqrt(2.0);
  if (plus) {
    u << h, h, -h, -h, Eigen::VectorXcd::Zero(dim - 4);
  } else {
    const cplx mi(0.0, -h);
    u << mi, -mi, mi, -mi, Eigen::VectorXcd::Zero(dim - 4);
  }
  return u;
}

double correlator(const LinearSystem& sys, const Eigen::VectorXcd& u, double omega) {
  const Eigen::MatrixXcd tp = transfer(sys, omega);
  const Eigen::MatrixXcd tm = transfer(sys, -omega);
  const cplx forward = (u.transpose() * tp * sys.p * tm.transpose() * u)(0, 0);
  const cplx backward = (u.transpose() * tm * sys.p * tp.transpose() * u)(0, 0);
  return 0.5 * (forward + backward).real();
}

void check_symmetric(std::span<const double> grid) {
  if (grid.size() < 3) throw ArgumentError("frequency grid needs at least 3 points");
  double span = 0.0;
  for (double w : grid) span = std::max(span, std::abs(w));
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n && !(grid[i + 1] > grid[i])) throw ArgumentError("frequency grid must be strictly ascending");
    if (std::abs(grid[i] + grid[n - 1 - i]) > 1e-12 * std::max(span, 1.0)) {
      throw ArgumentError("frequency grid must be symmetric about 0");
    }
  }
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::ThreeMinima:
      return "three-minima";
    case Regime::SingleBroad:
      return "single-broad";
    case Regime::Narrow:
      return "narrow";
  }
  return "narrow";
}

std::vector<double> SpectrumResult::omega_over_theta() const {
  std::vector<double> out(omega.size());
  const double scale = theta > 0.0 ? theta : 1.0;
  std::transform(omega.begin(), omega.end(), out.begin(), [scale](double w) { return w / scale; });
  return out;
}

double SpectrumResult::min_s_plus() const {
  return s_plus.empty() ? 0.0 : *std::min_element(s_plus.begin(), s_plus.end());
}

StabilityReport stability_check(const Couplings& c, const DecayRates& d) { return abscissa(make_system(c, d).m); }

std::vector<double> default_grid(double theta, double kappa, int points) {
  if (points < 3 || points % 2 == 0) throw ArgumentError("grid needs an odd number (>= 3) of points");
  const double half = 3.0 * std::max(theta, kappa);
  if (!(half > 0.0)) throw ArgumentError("grid extent must be positive");
  std::vector<double> grid(points);
  const int mid = points / 2;
  for (int i = 0; i < points; ++i) grid[i] = half * static_cast<double>(i - mid) / mid;
  return grid;
}

SpectrumResult squeezing_spectrum(const Couplings& c, const DecayRates& d, std::span<const double> omega_grid) {
  check_symmetric(omega_grid);
  const LinearSystem sys = make_system(c, d);
  require_stable(sys);

  const LinearSystem reference = make_system(Couplings{}, DecayRates(d.kappa1, d.kappa2, d.gamma_s, 0.0));
  require_stable(reference);
  const Eigen::VectorXcd ref_u = quadrature(reference.dim, true);
  const double calibration = correlator(reference, ref_u, 0.0);

  SpectrumResult res;
  res.omega.assign(omega_grid.begin(), omega_grid.end());
  res.s_plus.resize(res.omega.size());
  res.s_minus.resize(res.omega.size());
  res.calibration = calibration;
  const double t2 = std::norm(c.xi2) - std::norm(c.xi1);
  res.theta = t2 > 0.0 ? std::sqrt(t2) : 0.0;

  const Eigen::VectorXcd up = quadrature(sys.dim, true);
  const Eigen::VectorXcd um = quadrature(sys.dim, false);
  const std::size_t n = res.omega.size();
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::future<void>> jobs;
  for (std::size_t lo = 0; lo < n; lo += chunk) {
    const std::size_t hi = std::min(n, lo + chunk);
    jobs.push_back(std::async(std::launch::async, [&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) {
        res.s_plus[i] = correlator(sys, up, res.omega[i]) / calibration;
        res.s_minus[i] = correlator(sys, um, res.omega[i]) / calibration;
      }
    }));
  }
  for (auto& j : jobs) j.get();

  res.minima = find_minima(res.omega, res.s_plus);
  res.regime = classify_regime(res, res.theta, std::max(d.kappa1, d.kappa2));
  return res;
}

std::vector<SpectralMinimum> find_minima(std::span<const double> omega, std::span<const double> s) {
  const std::size_t n = s.size();
  if (omega.size() != n) throw ArgumentError("omega and spectrum sizes differ");
  std::vector<double> smooth(s.begin(), s.end());
  for (std::size_t i = 1; i + 1 < n; ++i) smooth[i] = (s[i - 1] + s[i] + s[i + 1]) / 3.0;
  std::vector<SpectralMinimum> out;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (smooth[i] < smooth[i - 1] && smooth[i] < smooth[i + 1]) out.push_back({omega[i], s[i]});
  }
  return out;
}

double dip_width(std::span<const double> omega, std::span<const double> s, std::size_t index) {
  const double level = 0.5 * (1.0 + s[index]);
  auto crossing = [&](std::ptrdiff_t step) {
    std::ptrdiff_t i = static_cast<std::ptrdiff_t>(index);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(s.size());
    while (i + step >= 0 && i + step < n) {
      const std::ptrdiff_t j = i + step;
      if (s[j] >= level) {
        const double f = (level - s[i]) / (s[j] - s[i]);
        return omega[i] + f * (omega[j] - omega[i]);
      }
      i = j;
    }
    return omega[i];
  };
  return crossing(1) - crossing(-1);
}

Regime classify_regime(const SpectrumResult& result, double /*theta*/, double kappa) {
  const auto& mins = result.minima;
  const std::size_t n = result.omega.size();
  if (n < 3) return Regime::Narrow;
  const double step = (result.omega.back() - result.omega.front()) / static_cast<double>(n - 1);
  if (mins.size() == 3) {
    bool separated = true;
    for (std::size_t i = 0; i + 1 < mins.size(); ++i) {
      if (mins[i + 1].omega - mins[i].omega < 3.0 * step - 1e-9 * std::abs(step)) separated = false;
    }
    if (separated) return Regime::ThreeMinima;
  }
  if (mins.size() == 1) {
    const auto it = std::lower_bound(result.omega.begin(), result.omega.end(), mins[0].omega);
    const auto index = static_cast<std::size_t>(it - result.omega.begin());
    if (dip_width(result.omega, result.s_plus, index) > kappa) return Regime::SingleBroad;
  }
  return Regime::Narrow;
}

Matrix6 spectral_steady_state(const Couplings& c, const DecayRates& d, int samples) {
  if (samples < 3) throw ArgumentError("need at least 3 quadrature samples");
  if (samples % 2 == 0) ++samples;
  const LinearSystem sys = make_system(c, d);
  require_stable(sys);
  const Matrix6 full_d = diffusion_matrix(d);
  const Eigen::MatrixXcd diff = full_d.topLeftCorner(sys.dim, sys.dim);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(sys.dim, sys.dim);
  const double t2 = std::norm(c.xi2) - std::norm(c.xi1);
  const double w0 = std::max({t2 > 0.0 ? std::sqrt(t2) : 0.0, d.kappa1, d.kappa2, d.gamma_s});

  // omega = w0 tan(phi); Simpson in phi on (-pi/2, pi/2). The integrand tends to D / w0 at both ends.
  const double h = kPi / (samples - 1);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(sys.dim, sys.dim);
  for (int i = 0; i < samples; ++i) {
    const double phi = -0.5 * kPi + i * h;
    Eigen::MatrixXcd f;
    if (i == 0 || i == samples - 1) {
      f = diff / w0;
    } else {
      const double omega = w0 * std::tan(phi);
      const Eigen::MatrixXcd g = (cplx(0.0, -omega) * id - sys.m).inverse();
      const double jac = w0 / (std::cos(phi) * std::cos(phi));
      f = jac * g * diff * g.adjoint();
    }
    const double weight = (i == 0 || i == samples - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += weight * f;
  }
  acc *= h / 3.0 / kTwoPi;
  Matrix6 out = Matrix6::Zero();
  out.topLeftCorner(sys.dim, sys.dim) = acc;
  return out;
}

Matrix6 lyapunov_steady_state(const Couplings& c, const DecayRates& d) {
  const LinearSystem sys = make_system(c, d);
  const StabilityReport rep = abscissa(sys.m);
  if (!rep.stable) throw StabilityError("drift matrix is not stable", rep.worst_eigenvalue);
  const double t = 60.0 / -rep.max_real_eigenvalue;
  MomentMatrix start = MomentMatrix::vacuum();
  if (sys.dim == 4) start.v(kC, kC) = 0.0;
  const double times[1] = {t};
  Matrix6 drift = drift_matrix(c, d);
  if (sys.dim == 4) {
    drift.row(kC).setZero();
    drift.row(kCDag).setZero();
  }
  return evolve_moments(drift, diffusion_matrix(d), start, times).front().v;
}

}  // namespace cavsq
