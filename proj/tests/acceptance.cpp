// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cavsq/analytic.hpp"
#include "cavsq/effective.hpp"
#include "cavsq/feasibility.hpp"
#include "cavsq/gaussian.hpp"
#include "cavsq/microscopic.hpp"
#include "cavsq/regression.hpp"
#include "cavsq/runner.hpp"
#include "cavsq/spectrum.hpp"

using namespace cavsq;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kEpsilonTarget = 3.04;
constexpr double kEpsilonTol = 0.01;
constexpr double kPhotonTarget = 109.75;
constexpr double kPhotonTol = 0.01;
constexpr double kTPiTarget = 50.0e-6;
constexpr double kTPiRelTol = 1e-3;
constexpr double kZetaDipTol = 1e-8;
constexpr double kZetaSymTol = 1e-6;
constexpr double kOccupationTol = 1e-6;
constexpr double kFidelityTol = 1e-6;
constexpr double kTargetFidelity = 0.999;
constexpr double kSpinAtTPiTol = 1e-6;
constexpr double kChargeTol = 1e-8;
constexpr double kNormTol = 1e-8;
constexpr double kShotNoiseTol = 1e-10;
constexpr double kSpectrumSymTol = 1e-8;
constexpr double kParsevalTol = 0.01;
constexpr double kCrossoverTarget = 0.328;
constexpr double kCrossoverAbsTol = 0.0005;
constexpr double kPaperCrossover = 0.35;
constexpr double kPaperCrossoverRelTol = 0.10;
constexpr double kThermalTarget = 0.038;
constexpr double kThermalRelTol = 0.05;
constexpr double kSuppressionTol = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

struct Runner {
  int failures = 0;
  void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt <= budget_s;
    if (!in_time) o.detail += " [over runtime budget]";
    const bool ok = o.pass && in_time;
    if (!ok) ++failures;
    std::printf("%s %2d %-28s %s (%.2f s / %.0f s)\n", ok ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), dt,
                budget_s);
    std::fflush(stdout);
  }
};

std::vector<double> span_samples(double t_end, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = t_end * i / (n - 1);
  return t;
}

// Fock-route oracle suite at r = 2 on the given layout.
struct FockSuite {
  double occupation_error = 0.0;
  double min_fidelity = 1.0;
  double target_fidelity = 0.0;
  double spin_at_t_pi = 0.0;
  double max_charge = 0.0;
  double max_charge_sq = 0.0;
  double max_norm_error = 0.0;
};

FockSuite fock_suite(const ModeLayout& layout, int samples) {
  const auto c = EffectiveCouplings::from_ratio(2.0, kTwoPi * 10e3);
  const auto times = span_samples(2.0 * t_pi(c), samples);
  const FockOperator n = conserved_charge(layout);
  const FockOperator n2 = n * n;
  FockSuite s;
  EvolveOptions opt;
  opt.keep_states = false;
  const std::size_t mid = times.size() / 2;
  opt.observer = [&](std::size_t i, double t, const FockState& psi) {
    const Occupations a = occupations_closed_form(c, t);
    const double f1 = mean_occupation(psi, kCavity1);
    const double f2 = mean_occupation(psi, kCavity2);
    const double f3 = mean_occupation(psi, kSpin);
    s.occupation_error = std::max({s.occupation_error, std::abs(f1 - a.n1), std::abs(f2 - a.n2), std::abs(f3 - a.n3)});
    const FockState ref = evolved_amplitudes(c, t, 60, 200, 1e-12).to_state(layout);
    s.min_fidelity = std::min(s.min_fidelity, std::norm(ref.amplitudes().dot(psi.amplitudes())));
    s.max_charge = std::max(s.max_charge, std::abs(expectation(psi, n)));
    s.max_charge_sq = std::max(s.max_charge_sq, std::abs(expectation(psi, n2)));
    s.max_norm_error = std::max(s.max_norm_error, std::abs(psi.norm() - 1.0));
    if (i == mid) {
      s.target_fidelity = fidelity_with_target(psi, 2.0);
      s.spin_at_t_pi = f3;
    }
  };
  evolve_effective(c, FockState::vacuum(layout), times, opt);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SpectrumResult spectrum_at(double theta_over_kappa) {
  const double kappa = kTwoPi * 7e3;
  const auto c = EffectiveCouplings::from_ratio(1.1, theta_over_kappa * kappa);
  return squeezing_spectrum(c, DecayRates::shared(kappa), default_grid(c.theta(), kappa));
}

double spectrum_asymmetry(const SpectrumResult& s) {
  double worst = 0.0;
  const std::size_t n = s.omega.size();
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max({worst, std::abs(s.s_plus[i] - s.s_plus[n - 1 - i]), std::abs(s.s_minus[i] - s.s_minus[n - 1 - i])});
  }
  return worst;
}

}  // namespace

int main() {
  Runner run;

  run.criterion(1, "squeezing_degree", 1.0, [] {
    const double e = squeezing_parameter(1.1);
    return Outcome{std::abs(e - kEpsilonTarget) <= kEpsilonTol, "epsilon(1.1)=" + fmt("%.6f", e)};
  });

  run.criterion(2, "photon_number", 1.0, [] {
    const auto c = EffectiveCouplings::from_ratio(1.1, kTwoPi * 10e3);
    const Occupations a = occupations_closed_form(c, t_pi(c));
    const double times[] = {0.0, t_pi(c)};
    const auto g = evolve_moments(drift_matrix(c, DecayRates{}), MomentMatrix::vacuum(), times);
    const Occupations o = occupations_from_moments(g.back());
    const bool ok = std::abs(a.n1 - kPhotonTarget) <= kPhotonTol && std::abs(a.n2 - kPhotonTarget) <= kPhotonTol &&
                    std::abs(o.n1 - kPhotonTarget) <= kPhotonTol && std::abs(o.n2 - kPhotonTarget) <= kPhotonTol;
    return Outcome{ok, "analytic n1=" + fmt("%.6f", a.n1) + " n2=" + fmt("%.6f", a.n2) +
                           " gaussian n1=" + fmt("%.6f", o.n1) + " n2=" + fmt("%.6f", o.n2)};
  });

  run.criterion(3, "preparation_time", 1.0, [] {
    const double t = t_pi_from_theta(kTwoPi * 10e3);
    return Outcome{std::abs(t / kTPiTarget - 1.0) <= kTPiRelTol, "T_pi=" + fmt("%.6g", t * 1e6) + " us"};
  });

  run.criterion(4, "zeta12_dynamics", 5.0, [] {
    bool ok = true;
    std::string detail;
    for (double r : {1.01, 1.05, 1.1}) {
      const auto c = EffectiveCouplings::from_ratio(r, kTwoPi * 10e3);
      const auto times = span_samples(2.0 * t_pi(c), 201);
      const auto out = evolve_moments(drift_matrix(c, DecayRates{}), MomentMatrix::vacuum(), times);
      std::vector<double> z;
      for (const auto& m : out) z.push_back(zeta12_from_moments(m));
      double sym = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) sym = std::max(sym, std::abs(z[i] - z[z.size() - 1 - i]));
      const bool this_ok = z.front() == 1.0 && z[100] <= kZetaDipTol && sym <= kZetaSymTol;
      ok = ok && this_ok;
      detail += "r=" + fmt("%.2f", r) + ": zeta(0)=" + fmt("%.3g", z.front()) + " zeta(Tpi)=" + fmt("%.2e", z[100]) +
                " asym=" + fmt("%.2e", sym) + "; ";
    }
    return Outcome{ok, detail};
  });

  FockSuite suite;
  run.criterion(5, "route_equivalence", 120.0, [&] {
    suite = fock_suite(ModeLayout(64, 64, 8), 41);
    const bool ok = suite.occupation_error <= kOccupationTol && suite.min_fidelity >= 1.0 - kFidelityTol &&
                    suite.target_fidelity >= kTargetFidelity && suite.spin_at_t_pi <= kSpinAtTPiTol;
    return Outcome{ok, "dims (64,64,8): max|dn|=" + fmt("%.3e", suite.occupation_error) +
                           " min F=" + fmt("%.9f", suite.min_fidelity) +
                           " F_target(Tpi)=" + fmt("%.6f", suite.target_fidelity) +
                           " n3(Tpi)=" + fmt("%.2e", suite.spin_at_t_pi)};
  });

  run.criterion(6, "conservation", 1.0, [&] {
    const bool ok = suite.max_charge <= kChargeTol && suite.max_charge_sq <= kChargeTol &&
                    suite.max_norm_error <= kNormTol;
    return Outcome{ok, "max|<N>|=" + fmt("%.2e", suite.max_charge) + " max|<N^2>|=" + fmt("%.2e", suite.max_charge_sq) +
                           " max|norm-1|=" + fmt("%.2e", suite.max_norm_error)};
  });

  std::vector<SpectrumResult> spectra;
  run.criterion(7, "spectrum_regimes", 30.0, [&] {
    spectra = {spectrum_at(10.0), spectrum_at(1.0), spectrum_at(0.1)};
    const auto& hi = spectra[0];
    const auto& mid = spectra[1];
    const auto& lo = spectra[2];
    const double step = hi.omega[1] - hi.omega[0];
    bool three = hi.minima.size() == 3;
    if (three) {
      three = std::abs(hi.minima[1].omega) <= step && std::abs(hi.minima[0].omega + hi.theta) <= step &&
              std::abs(hi.minima[2].omega - hi.theta) <= step;
    }
    const bool single_mid = mid.minima.size() == 1 && std::abs(mid.minima[0].omega) <= mid.omega[1] - mid.omega[0];
    const bool mid_smallest = mid.min_s_plus() < hi.min_s_plus() && mid.min_s_plus() < lo.min_s_plus();
    const bool single_lo = lo.minima.size() == 1 && lo.regime == Regime::Narrow;
    const bool lo_larger = lo.min_s_plus() > mid.min_s_plus();
    const auto g = default_grid(kTwoPi * 10e3, kTwoPi * 7e3);
    const auto cal = squeezing_spectrum(Couplings{}, DecayRates::shared(kTwoPi * 7e3), g);
    double shot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      shot = std::max({shot, std::abs(cal.s_plus[i] - 1.0), std::abs(cal.s_minus[i] - 1.0)});
    }
    const bool cal_ok = shot <= kShotNoiseTol;
    auto yn = [](bool b) { return b ? std::string("ok") : std::string("no"); };
    std::string d = "10k: " + std::to_string(hi.minima.size()) + " minima (" + yn(three) + "); ";
    d += "1k: " + std::to_string(mid.minima.size()) + " minima, regime " + to_string(mid.regime) + " (" +
         yn(single_mid) + "), minS=" + fmt("%.7g", mid.min_s_plus()) + " smallest (" + yn(mid_smallest) + "); ";
    d += "0.1k: " + std::to_string(lo.minima.size()) + " minima, regime " + to_string(lo.regime) + " (" +
         yn(single_lo) + "), minS=" + fmt("%.7g", lo.min_s_plus()) + " > 1k (" + yn(lo_larger) + "); ";
    d += "10k minS=" + fmt("%.7g", hi.min_s_plus()) + "; shot |S-1|=" + fmt("%.1e", shot);
    return Outcome{three && single_mid && mid_smallest && single_lo && lo_larger && cal_ok, d};
  });

  run.criterion(8, "spectrum_sanity", 30.0, [&] {
    if (spectra.size() != 3) spectra = {spectrum_at(10.0), spectrum_at(1.0), spectrum_at(0.1)};
    double asym = 0.0;
    for (const auto& s : spectra) asym = std::max(asym, spectrum_asymmetry(s));
    const double kappa = kTwoPi * 7e3;
    const auto c = EffectiveCouplings::from_ratio(1.1, kappa);
    const auto d = DecayRates::shared(kappa);
    const Matrix6 a = spectral_steady_state(c, d);
    const Matrix6 b = lyapunov_steady_state(c, d);
    const double parseval = (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
    return Outcome{asym <= kSpectrumSymTol && parseval <= kParsevalTol,
                   "max asym=" + fmt("%.2e", asym) + " Parseval rel=" + fmt("%.2e", parseval)};
  });

  run.criterion(9, "adiabatic_elimination", 120.0, [] {
    std::vector<double> dev;
    for (double ratio : {10.0, 20.0, 40.0}) {
      const RamanConfig cfg = RamanConfig::dispersive(ratio);
      dev.push_back(adiabatic_error(cfg, effective_t_pi(cfg), kAdiabaticSamples).max_occupation_deviation);
    }
    const bool ok = dev[1] <= kAdiabaticToleranceN1Ratio20 && dev[1] < dev[0] && dev[2] < dev[1];
    return Outcome{ok, "deviation 10/20/40 = " + fmt("%.5f", dev[0]) + "/" + fmt("%.5f", dev[1]) + "/" +
                           fmt("%.5f", dev[2]) + " fixture " + fmt("%.4f", kAdiabaticToleranceN1Ratio20)};
  });

  run.criterion(10, "thermal_estimates", 1.0, [] {
    const double tc = crossover_temperature(6.83e9);
    const double n = thermal_occupation(6.83e9, 0.1);
    const double s = thermal_suppression(1.0, 99.0);
    const bool ok = std::abs(tc - kCrossoverTarget) <= kCrossoverAbsTol &&
                    std::abs(tc / kPaperCrossover - 1.0) <= kPaperCrossoverRelTol &&
                    std::abs(n / kThermalTarget - 1.0) <= kThermalRelTol && n < 0.1 &&
                    std::abs(s - 0.01) <= kSuppressionTol;
    return Outcome{ok, "T_x=" + fmt("%.5f", tc) + " K n_T(100 mK)=" + fmt("%.5f", n) + " suppression=" + fmt("%.6g", s)};
  });

  run.criterion(11, "determinism", 300.0, [] {
    using nlohmann::json;
    const std::vector<std::pair<cli::Command, json>> runs = {
        {cli::Command::Evolve, {{"r_ratio", 1.1}, {"theta_hz", 10e3}, {"samples_count", 201}}},
        {cli::Command::Evolve,
         {{"route", "fock"}, {"r_ratio", 2.0}, {"dims_count", {64, 64, 8}}, {"samples_count", 41}}},
        {cli::Command::Spectrum, {{"r_ratio", 1.1}, {"kappa_hz", 7e3}, {"theta_over_kappa_ratio", 10.0}}},
        {cli::Command::Spectrum, {{"r_ratio", 1.1}, {"kappa_hz", 7e3}, {"theta_over_kappa_ratio", 1.0}}},
        {cli::Command::Spectrum, {{"r_ratio", 1.1}, {"kappa_hz", 7e3}, {"theta_over_kappa_ratio", 0.1}}},
        {cli::Command::Feasibility, json::object()},
        {cli::Command::Sweep,
         {{"r_ratio", {1.01, 1.05, 1.1}},
          {"theta_over_kappa_ratio", {0.1, 1.0, 10.0}},
          {"outputs", {"epsilon", "t_pi", "min_s"}}}},
    };
    const fs::path root = fs::temp_directory_path() / "cavsq_acceptance_determinism";
    fs::remove_all(root);
    int files = 0;
    int mismatches = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      std::vector<std::vector<std::string>> contents(2);
      std::vector<std::string> names;
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path dir = root / std::to_string(k) / std::to_string(rep);
        json doc{{"parameters", runs[k].second}, {"output_dir", dir.string()}};
        const auto res = cli::run(cli::parse_config(runs[k].first, doc));
        for (const auto& f : res.files) {
          if (f.filename().string().find("manifest") != std::string::npos) continue;
          contents[static_cast<std::size_t>(rep)].push_back(slurp(f));
          if (rep == 0) names.push_back(f.filename().string());
        }
      }
      if (contents[0].size() != contents[1].size()) ++mismatches;
      for (std::size_t i = 0; i < std::min(contents[0].size(), contents[1].size()); ++i) {
        ++files;
        if (contents[0][i] != contents[1][i] || contents[0][i].empty()) ++mismatches;
      }
    }
    fs::remove_all(root);
    return Outcome{mismatches == 0 && files > 0,
                   std::to_string(files) + " data files compared, " + std::to_string(mismatches) + " mismatches"};
  });

  // Diagnostic only: the same oracle suite on the truncation the library recommends for r = 2.
  {
    const ModeLayout rec = recommended_layout(2.0, 1e-10);
    const auto t0 = std::chrono::steady_clock::now();
    const FockSuite s = fock_suite(rec, 41);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("INFO    route_equivalence at recommended dims (%d,%d,%d): max|dn|=%.3e min F=%.9f "
                "F_target(Tpi)=%.6f n3(Tpi)=%.2e max|<N>|=%.2e (%.2f s)\n",
                rec.dim(0), rec.dim(1), rec.dim(2), s.occupation_error, s.min_fidelity, s.target_fidelity,
                s.spin_at_t_pi, s.max_charge, dt);
  }

  std::printf("%d criterion(s) failed\n", run.failures);
  return run.failures == 0 ? 0 : 1;
}
