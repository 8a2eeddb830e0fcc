#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <vector>

#include "cavsq/analytic.hpp"
#include "cavsq/effective.hpp"
#include "cavsq/errors.hpp"
#include "cavsq/feasibility.hpp"
#include "cavsq/gaussian.hpp"
#include "cavsq/microscopic.hpp"
#include "cavsq/runner.hpp"
#include "cavsq/spectrum.hpp"

namespace py = pybind11;
using namespace cavsq;

namespace {

py::dict occupations_dict(const Occupations& o) {
  py::dict d;
  d["n1"] = o.n1;
  d["n2"] = o.n2;
  d["n3"] = o.n3;
  return d;
}

py::dict evolve_gaussian(double r, double theta, const std::vector<double>& times, double kappa, double gamma_s,
                         double n_thermal) {
  const auto c = EffectiveCouplings::from_ratio(r, theta);
  const DecayRates d(kappa, kappa, gamma_s, n_thermal);
  const auto out = evolve_moments(drift_matrix(c, d), diffusion_matrix(d), MomentMatrix::vacuum(), times);
  std::vector<double> n1, n2, n3, zeta;
  for (const auto& m : out) {
    const Occupations o = occupations_from_moments(m);
    n1.push_back(o.n1);
    n2.push_back(o.n2);
    n3.push_back(o.n3);
    zeta.push_back(zeta12_from_moments(m));
  }
  py::dict res;
  res["t"] = times;
  res["n1"] = n1;
  res["n2"] = n2;
  res["n3"] = n3;
  res["zeta12"] = zeta;
  return res;
}

py::dict evolve_fock(double r, double theta, const std::vector<double>& times, std::array<int, 3> dims) {
  const auto c = EffectiveCouplings::from_ratio(r, theta);
  const ModeLayout layout(dims[0], dims[1], dims[2]);
  EvolveOptions opt;
  opt.keep_states = false;
  std::vector<double> fidelity;
  opt.observer = [&](std::size_t, double, const FockState& psi) { fidelity.push_back(fidelity_with_target(psi, r)); };
  const auto traj = evolve_effective(c, FockState::vacuum(layout), times, opt);
  std::vector<double> n1, n2, n3;
  for (const auto& o : traj.occupations) {
    n1.push_back(o.n1);
    n2.push_back(o.n2);
    n3.push_back(o.n3);
  }
  py::dict res;
  res["t"] = traj.times;
  res["n1"] = n1;
  res["n2"] = n2;
  res["n3"] = n3;
  res["zeta12"] = traj.zeta12;
  res["leakage"] = traj.leakage;
  res["norm"] = traj.norm;
  res["target_fidelity"] = fidelity;
  res["warnings"] = traj.warnings;
  return res;
}

py::dict spectrum(cplx xi1, cplx xi2, double kappa, const std::vector<double>& grid) {
  const auto s = squeezing_spectrum(Couplings{xi1, xi2}, DecayRates::shared(kappa), grid);
  py::list minima;
  for (const auto& m : s.minima) minima.append(py::make_tuple(m.omega, m.s));
  py::dict res;
  res["omega"] = s.omega;
  res["s_plus"] = s.s_plus;
  res["s_minus"] = s.s_minus;
  res["minima"] = minima;
  res["regime"] = to_string(s.regime);
  res["theta"] = s.theta;
  return res;
}

py::dict preset_dict(const ExperimentPreset& p) {
  py::dict d;
  d["theta"] = p.theta();
  d["xi1"] = p.xi1();
  d["xi2"] = p.xi2();
  d["t_pi"] = p.t_pi();
  d["epsilon"] = p.epsilon();
  d["photons_per_mode"] = p.photons_per_mode();
  d["theta_over_kappa"] = p.theta_over_kappa();
  d["n_thermal"] = p.n_thermal();
  d["crossover_temperature"] = p.crossover_temperature();
  d["heating_rate_over_2pi"] = p.heating_rate_over_2pi();
  d["collective_coupling_over_2pi"] = p.collective_coupling_over_2pi();
  return d;
}

py::dict adiabatic(double ratio, double r, int n_atoms, int samples) {
  const RamanConfig cfg = RamanConfig::dispersive(ratio, r, 1.0, n_atoms);
  const auto rep = adiabatic_error(cfg, effective_t_pi(cfg), samples);
  py::dict d;
  d["max_occupation_deviation"] = rep.max_occupation_deviation;
  d["max_intermediate_population"] = rep.max_intermediate_population;
  d["bare_occupation_deviation"] = rep.bare_occupation_deviation;
  d["max_norm_drift"] = rep.max_norm_drift;
  d["dispersive_ratio"] = rep.dispersive_ratio;
  return d;
}

int run_command(const std::string& command, const std::string& config_json) {
  const auto cfg = cli::parse_config(cli::parse_command(command), nlohmann::json::parse(config_json));
  return cli::run(cfg).exit_code;
}

}  // namespace

PYBIND11_MODULE(_cavsq, m) {
  m.doc() = "Cavity two-mode squeezing simulator";

  // Translators run newest first, so subclasses are registered after their bases.
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<StabilityError>(m, "StabilityError", numerical.ptr());
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);

  m.def("squeezing_parameter", &squeezing_parameter, py::arg("r"));
  m.def("photons_at_t_pi", &photons_at_t_pi, py::arg("r"));
  m.def("t_pi_from_theta", &t_pi_from_theta, py::arg("theta"));
  m.def(
      "occupations_closed_form",
      [](double r, double theta, double t) {
        return occupations_dict(occupations_closed_form(EffectiveCouplings::from_ratio(r, theta), t));
      },
      py::arg("r"), py::arg("theta"), py::arg("t"));
  m.def(
      "zeta12_closed_form",
      [](double r, double theta, double t) { return zeta12_closed_form(EffectiveCouplings::from_ratio(r, theta), t); },
      py::arg("r"), py::arg("theta"), py::arg("t"));
  m.def("tmss_amplitudes", &tmss_amplitudes, py::arg("r"), py::arg("n_max"));
  m.def("evolve_gaussian", &evolve_gaussian, py::arg("r"), py::arg("theta"), py::arg("times"),
        py::arg("kappa") = 0.0, py::arg("gamma_s") = 0.0, py::arg("n_thermal") = 0.0);
  m.def("evolve_fock", &evolve_fock, py::arg("r"), py::arg("theta"), py::arg("times"), py::arg("dims"));
  m.def("default_grid", &default_grid, py::arg("theta"), py::arg("kappa"), py::arg("points") = 2001);
  m.def("squeezing_spectrum", &spectrum, py::arg("xi1"), py::arg("xi2"), py::arg("kappa"), py::arg("grid"));
  m.def(
      "stability_check",
      [](cplx xi1, cplx xi2, double kappa) {
        const auto rep = stability_check(Couplings{xi1, xi2}, DecayRates::shared(kappa));
        return py::make_tuple(rep.stable, rep.max_real_eigenvalue);
      },
      py::arg("xi1"), py::arg("xi2"), py::arg("kappa"));
  m.def("thermal_occupation", &thermal_occupation, py::arg("frequency"), py::arg("temperature"));
  m.def("crossover_temperature", &crossover_temperature, py::arg("frequency"));
  m.def("thermal_suppression", &thermal_suppression, py::arg("kappa"), py::arg("gamma_c"));
  m.def("rb_preset", [] { return preset_dict(rb_preset()); });
  m.def("adiabatic_error", &adiabatic, py::arg("ratio"), py::arg("r") = 1.1, py::arg("n_atoms") = 1,
        py::arg("samples") = 101);
  m.def("run", &run_command, py::arg("command"), py::arg("config_json"),
        "Runs a CLI command from a JSON config string and returns its exit code.");
}
