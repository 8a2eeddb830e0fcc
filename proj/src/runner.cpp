#include "cavsq/runner.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "cavsq/analytic.hpp"
#include "cavsq/effective.hpp"
#include "cavsq/feasibility.hpp"
#include "cavsq/gaussian.hpp"
#include "cavsq/microscopic.hpp"
#include "cavsq/regression.hpp"
#include "cavsq/spectrum.hpp"

namespace cavsq::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kUnitSuffixes = {"_hz", "_s", "_k", "_tpi", "_ratio", "_count"};
const std::set<std::string> kStringKeys = {"route", "mutation"};
const std::set<std::string> kListKeys = {"outputs"};

bool has_suffix(const std::string& key, const std::string& suffix) {
  return key.size() > suffix.size() && key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool unit_suffixed(const std::string& key) {
  return std::any_of(kUnitSuffixes.begin(), kUnitSuffixes.end(), [&](const auto& s) { return has_suffix(key, s); });
}

// Typed access to the parameter map. Every key must be consumed by the command.
class Params {
 public:
  explicit Params(const nlohmann::json& p) : p_(p) {}

  bool has(const std::string& key) const { return p_.contains(key); }

  double number(const std::string& key) const {
    used_.insert(key);
    const auto& v = p_.at(key);
    if (!v.is_number()) throw ConfigError("parameter '" + key + "' must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  /// Frequency key in Hz returned as rad/s.
  double angular(const std::string& key) const { return kTwoPi * number(key); }
  double angular(const std::string& key, double fallback_hz) const { return kTwoPi * number(key, fallback_hz); }

  int count(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const double x = number(key);
    if (x != std::floor(x) || x < 0 || x > 1e9) throw ConfigError("parameter '" + key + "' must be a non-negative integer");
    return static_cast<int>(x);
  }

  std::vector<double> numbers(const std::string& key) const {
    used_.insert(key);
    const auto& v = p_.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError("parameter '" + key + "' must be a number or a list of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError("parameter '" + key + "' must contain only numbers");
      out.push_back(x.get<double>());
    }
    if (out.empty()) throw ConfigError("parameter '" + key + "' is an empty grid");
    return out;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    used_.insert(key);
    const auto& v = p_.at(key);
    if (!v.is_string()) throw ConfigError("parameter '" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<std::string> texts(const std::string& key) const {
    used_.insert(key);
    const auto& v = p_.at(key);
    if (!v.is_array()) throw ConfigError("parameter '" + key + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& x : v) {
      if (!x.is_string()) throw ConfigError("parameter '" + key + "' must contain only strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }

  void require_all_used() const {
    for (auto it = p_.begin(); it != p_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError("unknown parameter '" + it.key() + "'");
    }
  }

 private:
  const nlohmann::json& p_;
  mutable std::set<std::string> used_;
};

// Column-major table; a column holds numbers or text.
struct Column {
  std::string name;
  std::vector<double> numbers;
  std::vector<std::string> text;
  bool is_text = false;
  std::size_t size() const { return is_text ? text.size() : numbers.size(); }
};

struct Table {
  std::vector<Column> columns;

  Column& add(const std::string& name, std::vector<double> values) {
    columns.push_back({name, std::move(values), {}, false});
    return columns.back();
  }
  Column& add_text(const std::string& name, std::vector<std::string> values) {
    columns.push_back({name, {}, std::move(values), true});
    return columns.back();
  }
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

void require_finite(const Table& t) {
  for (const auto& c : t.columns) {
    if (c.is_text) continue;
    for (double x : c.numbers) {
      if (!std::isfinite(x)) throw NumericalError("non-finite value in output column '" + c.name + "'");
    }
  }
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write output file " + path.string());
  out << bytes;
}

fs::path write_table(const Table& t, const fs::path& dir, const std::string& stem, OutputFormat format) {
  require_finite(t);
  for (const auto& c : t.columns) {
    if (c.size() != t.rows()) throw NumericalError("ragged output table " + stem);
  }
  std::ostringstream os;
  fs::path path;
  if (format == OutputFormat::Csv) {
    path = dir / (stem + ".csv");
    for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j].name;
    os << '\n';
    for (std::size_t i = 0; i < t.rows(); ++i) {
      for (std::size_t j = 0; j < t.columns.size(); ++j) {
        const auto& c = t.columns[j];
        os << (j ? "," : "") << (c.is_text ? c.text[i] : format_number(c.numbers[i]));
      }
      os << '\n';
    }
  } else {
    path = dir / (stem + ".json");
    ojson doc = ojson::object();
    for (const auto& c : t.columns) {
      if (c.is_text) {
        doc[c.name] = c.text;
      } else {
        doc[c.name] = c.numbers;
      }
    }
    os << doc.dump(2) << '\n';
  }
  write_bytes(path, os.str());
  return path;
}

fs::path write_record(const ojson& record, const fs::path& dir, const std::string& stem) {
  const fs::path path = dir / (stem + ".json");
  write_bytes(path, record.dump(2) + "\n");
  return path;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw ConfigError("need at least 2 samples");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  out.back() = hi;
  return out;
}

// Couplings from either (r_ratio, theta_hz) or (xi1_hz, xi2_hz).
struct CouplingChoice {
  Couplings raw;
  std::optional<EffectiveCouplings> effective;
  double theta = 0.0;
  bool zero() const { return raw.xi1 == cplx{} && raw.xi2 == cplx{}; }
};

CouplingChoice read_couplings(const Params& p, std::optional<double> theta_override = std::nullopt) {
  CouplingChoice out;
  if (p.has("xi1_hz") || p.has("xi2_hz")) {
    if (p.has("r_ratio")) throw ConfigError("give either r_ratio or xi1_hz/xi2_hz, not both");
    out.raw = {p.angular("xi1_hz", 0.0), p.angular("xi2_hz", 0.0)};
    if (std::abs(out.raw.xi2) > std::abs(out.raw.xi1) && std::abs(out.raw.xi1) > 0.0) {
      out.effective.emplace(out.raw.xi1, out.raw.xi2);
      out.theta = out.effective->theta();
    }
    return out;
  }
  if (!p.has("r_ratio")) throw ConfigError("missing r_ratio (or xi1_hz/xi2_hz)");
  const double r = p.number("r_ratio");
  if (!(r > 1.0)) throw ConfigError("r_ratio must exceed 1");
  const double theta = theta_override ? *theta_override : p.angular("theta_hz", 10e3);
  if (!(theta > 0.0)) throw ConfigError("theta must be positive");
  out.effective = EffectiveCouplings::from_ratio(r, theta);
  out.raw = *out.effective;
  out.theta = theta;
  return out;
}

DecayRates read_decay(const Params& p) {
  double k1 = 0.0, k2 = 0.0;
  if (p.has("kappa_hz")) {
    if (p.has("kappa1_hz") || p.has("kappa2_hz")) throw ConfigError("give kappa_hz or kappa1_hz/kappa2_hz, not both");
    k1 = k2 = p.angular("kappa_hz");
  } else {
    k1 = p.angular("kappa1_hz", 0.0);
    k2 = p.angular("kappa2_hz", 0.0);
  }
  return DecayRates(k1, k2, p.angular("gamma_s_hz", 0.0), p.number("n_thermal_ratio", 0.0));
}

// Hamiltonian with the pair term a1^dag c^dag replaced by a2^dag c^dag (mutation hook).
FockOperator corrupted_hamiltonian(const Couplings& c, const ModeLayout& layout) {
  const auto a2 = mode_annihilator(layout, kCavity2);
  const auto s = mode_annihilator(layout, kSpin);
  const auto pair = a2.adjoint() * s.adjoint();
  const auto swap = a2.adjoint() * s;
  return (kI * c.xi1) * pair + (-kI * std::conj(c.xi1)) * pair.adjoint() + (kI * c.xi2) * swap +
         (-kI * std::conj(c.xi2)) * swap.adjoint();
}

struct RouteSeries {
  std::string route;
  std::vector<Occupations> occ;
  std::vector<double> zeta;
  std::vector<double> leakage;
  std::vector<std::string> warnings;
};

RouteSeries evolve_route(const std::string& route, const CouplingChoice& cc, const DecayRates& decay,
                         const std::vector<double>& times, const Params& p, double max_dim) {
  RouteSeries out;
  out.route = route;
  const bool damped = !decay.closed() || decay.n_thermal != 0.0;
  if (route == "gaussian") {
    const auto moments = evolve_moments(drift_matrix(cc.raw, decay), diffusion_matrix(decay), MomentMatrix::vacuum(), times);
    for (const auto& m : moments) {
      out.occ.push_back(occupations_from_moments(m));
      out.zeta.push_back(zeta12_from_moments(m));
    }
    return out;
  }
  if (damped) throw ConfigError("route '" + route + "' is closed-system only; use the gaussian route with damping");
  if (route == "analytic") {
    if (!cc.effective && !cc.zero()) throw ConfigError("analytic route needs |xi2| > |xi1| > 0");
    for (double t : times) {
      if (cc.effective) {
        out.occ.push_back(occupations_closed_form(*cc.effective, t));
        out.zeta.push_back(zeta12_closed_form(*cc.effective, t));
      } else {
        out.occ.push_back({});
        out.zeta.push_back(1.0);
      }
    }
    return out;
  }
  if (route == "fock") {
    std::optional<ModeLayout> layout;
    if (p.has("dims_count")) {
      const auto dims = p.numbers("dims_count");
      if (dims.size() != 3) throw ConfigError("dims_count needs three entries");
      std::vector<int> d;
      for (double x : dims) {
        if (x != std::floor(x) || x < 2) throw ConfigError("dims_count entries must be integers >= 2");
        d.push_back(static_cast<int>(x));
      }
      layout.emplace(d);
    } else if (cc.effective) {
      const double r = cc.effective->r();
      const double q = std::pow(2.0 * r / (1.0 + r * r), 2);
      const double levels = std::ceil(std::log(1e-10) / std::log(q)) + 1.0;
      const double spin = std::ceil(std::log(1e-10) / std::log(1.0 / (r * r))) + 1.0;
      if (levels * levels * spin > max_dim) {
        std::ostringstream msg;
        msg << "fock route infeasible at r = " << r << ": needs about " << levels << " x " << levels << " x " << spin
            << " = " << levels * levels * spin << " states (cap " << max_dim << "); use route \"gaussian\"";
        throw ConfigError(msg.str());
      }
      layout = recommended_layout(r);
    } else {
      layout.emplace(std::vector<int>{4, 4, 4});
    }
    if (static_cast<double>(layout->composite_dim()) > max_dim) {
      throw ConfigError("fock layout exceeds max_dim_count (" + std::to_string(layout->composite_dim()) +
                        " states); use route \"gaussian\"");
    }
    EvolveOptions opts;
    opts.keep_states = false;
    if (cc.theta > 0.0) opts.max_step = 0.01 / cc.theta;
    const Trajectory traj = evolve_state(build_effective_hamiltonian(cc.raw, *layout), FockState::vacuum(*layout), times, opts);
    out.occ = traj.occupations;
    out.zeta = traj.zeta12;
    out.leakage = traj.leakage;
    out.warnings = traj.warnings;
    return out;
  }
  throw ConfigError("unknown route '" + route + "' (fock, gaussian, analytic, all)");
}

RunResult run_evolve(const RunConfig& cfg, const Params& p) {
  const CouplingChoice cc = read_couplings(p);
  const DecayRates decay = read_decay(p);
  const std::string route = p.text("route", "gaussian");
  const int samples = p.count("samples_count", 201);
  const double max_dim = p.number("max_dim_count", 2e5);
  double t_end = 0.0;
  if (p.has("t_end_tpi")) {
    if (p.has("t_end_s")) throw ConfigError("give t_end_tpi or t_end_s, not both");
    if (!cc.effective) throw ConfigError("t_end_tpi needs couplings in the squeezing regime; use t_end_s");
    t_end = p.number("t_end_tpi") * t_pi(*cc.effective);
  } else if (p.has("t_end_s")) {
    t_end = p.number("t_end_s");
  } else {
    if (!cc.effective) throw ConfigError("t_end_s is required when T_pi is undefined");
    t_end = 2.0 * t_pi(*cc.effective);
  }
  if (!(t_end > 0.0)) throw ConfigError("end time must be positive");
  const std::vector<double> times = linspace(0.0, t_end, samples);

  std::vector<std::string> routes = route == "all" ? std::vector<std::string>{"fock", "gaussian", "analytic"}
                                                   : std::vector<std::string>{route};
  std::vector<RouteSeries> series;
  for (const auto& r : routes) series.push_back(evolve_route(r, cc, decay, times, p, max_dim));
  p.require_all_used();

  RunResult res;
  std::vector<double> theta_t(times.size());
  std::transform(times.begin(), times.end(), theta_t.begin(), [&](double t) { return cc.theta * t; });
  ojson summary;
  summary["command"] = "evolve";
  summary["route"] = route;
  summary["theta_rad_s"] = cc.theta;
  if (cc.effective) {
    summary["r"] = cc.effective->r();
    summary["t_pi_s"] = t_pi(*cc.effective);
  }
  summary["samples"] = samples;
  ojson routes_json = ojson::object();
  for (const auto& s : series) {
    Table t;
    t.add("t_seconds", times);
    t.add("theta_t", theta_t);
    std::vector<double> n1, n2, n3;
    for (const auto& o : s.occ) {
      n1.push_back(o.n1);
      n2.push_back(o.n2);
      n3.push_back(o.n3);
    }
    t.add("n1", n1);
    t.add("n2", n2);
    t.add("n3", n3);
    t.add("zeta12", s.zeta);
    if (s.route == "fock") t.add("leakage", s.leakage);
    res.files.push_back(write_table(t, cfg.output_dir, "evolve_" + s.route, cfg.format));
    const auto zmin = std::min_element(s.zeta.begin(), s.zeta.end());
    ojson r;
    r["min_zeta12"] = *zmin;
    r["t_min_zeta12_s"] = times[static_cast<std::size_t>(zmin - s.zeta.begin())];
    if (!s.leakage.empty()) r["max_leakage"] = *std::max_element(s.leakage.begin(), s.leakage.end());
    r["warnings"] = s.warnings;
    routes_json[s.route] = r;
  }
  summary["routes"] = routes_json;
  if (series.size() > 1) {
    ojson pairs = ojson::object();
    double worst = 0.0;
    for (std::size_t a = 0; a < series.size(); ++a) {
      for (std::size_t b = a + 1; b < series.size(); ++b) {
        double d = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
          const auto& x = series[a].occ[i];
          const auto& y = series[b].occ[i];
          d = std::max({d, std::abs(x.n1 - y.n1), std::abs(x.n2 - y.n2), std::abs(x.n3 - y.n3)});
        }
        pairs[series[a].route + "_vs_" + series[b].route] = d;
        worst = std::max(worst, d);
      }
    }
    summary["occupation_discrepancy"] = pairs;
    summary["max_occupation_discrepancy"] = worst;
  }
  res.files.push_back(write_record(summary, cfg.output_dir, "evolve_summary"));
  res.summary = summary;
  return res;
}

RunResult run_spectrum(const RunConfig& cfg, const Params& p) {
  const DecayRates decay = read_decay(p);
  const double kappa = std::max(decay.kappa1, decay.kappa2);
  if (!(kappa > 0.0)) throw ConfigError("spectrum needs kappa_hz > 0");
  std::optional<double> theta_override;
  if (p.has("theta_over_kappa_ratio")) {
    if (p.has("theta_hz")) throw ConfigError("give theta_hz or theta_over_kappa_ratio, not both");
    theta_override = p.number("theta_over_kappa_ratio") * kappa;
  }
  const CouplingChoice cc = read_couplings(p, theta_override);
  const int points = p.count("points_count", 2001);
  p.require_all_used();

  const std::vector<double> grid = default_grid(cc.theta, kappa, points);
  const SpectrumResult s = squeezing_spectrum(cc.raw, decay, grid);
  const StabilityReport stab = stability_check(cc.raw, decay);

  RunResult res;
  const double scale = cc.theta > 0.0 ? cc.theta : kappa;
  std::vector<double> x(grid.size());
  std::transform(grid.begin(), grid.end(), x.begin(), [&](double w) { return w / scale; });
  Table t;
  t.add("omega_over_theta", x);
  t.add("s_plus", s.s_plus);
  t.add("s_minus", s.s_minus);
  res.files.push_back(write_table(t, cfg.output_dir, "spectrum", cfg.format));

  ojson summary;
  summary["command"] = "spectrum";
  summary["regime"] = to_string(s.regime);
  summary["omega_unit"] = cc.theta > 0.0 ? "theta" : "kappa";
  summary["theta_rad_s"] = cc.theta;
  summary["kappa_rad_s"] = kappa;
  summary["theta_over_kappa"] = cc.theta / kappa;
  summary["min_s_plus"] = s.min_s_plus();
  summary["min_s_minus"] = *std::min_element(s.s_minus.begin(), s.s_minus.end());
  summary["max_real_eigenvalue"] = stab.max_real_eigenvalue;
  ojson mins = ojson::array();
  for (const auto& m : s.minima) mins.push_back({{"omega_over_theta", m.omega / scale}, {"s", m.s}});
  summary["minima"] = mins;
  res.files.push_back(write_record(summary, cfg.output_dir, "spectrum_summary"));
  res.summary = summary;
  return res;
}

RunResult run_feasibility(const RunConfig& cfg, const Params& p) {
  ExperimentPreset preset = rb_preset();
  preset.theta_over_2pi = p.number("theta_hz", preset.theta_over_2pi);
  preset.rabi_ratio = p.number("r_ratio", preset.rabi_ratio);
  preset.dispersive_ratio = p.number("dispersive_ratio", preset.dispersive_ratio);
  preset.kappa_over_2pi = p.number("kappa_hz", preset.kappa_over_2pi);
  preset.hyperfine_freq = p.number("frequency_hz", preset.hyperfine_freq);
  preset.temperature = p.number("temperature_k", preset.temperature);
  std::optional<double> gamma_a;
  if (p.has("gamma_a_hz")) gamma_a = p.number("gamma_a_hz");
  const double coupling = p.number("collective_coupling_hz", preset.collective_coupling_over_2pi());
  p.require_all_used();

  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<std::string> units;
  auto put = [&](const std::string& n, double v, const std::string& u) {
    names.push_back(n);
    values.push_back(v);
    units.push_back(u);
  };
  put("theta_over_2pi", preset.theta_over_2pi, "Hz");
  put("rabi_ratio", preset.rabi_ratio, "1");
  put("dispersive_ratio", preset.dispersive_ratio, "1");
  put("kappa_over_2pi", preset.kappa_over_2pi, "Hz");
  put("hyperfine_freq", preset.hyperfine_freq, "Hz");
  put("temperature", preset.temperature, "K");
  put("xi1_over_2pi", preset.xi1() / kTwoPi, "Hz");
  put("xi2_over_2pi", preset.xi2() / kTwoPi, "Hz");
  put("collective_coupling_over_2pi", preset.collective_coupling_over_2pi(), "Hz");
  put("coupling_in_quoted_range", preset.coupling_in_quoted_range() ? 1.0 : 0.0, "1");
  put("t_pi", preset.t_pi(), "s");
  put("epsilon", preset.epsilon(), "1");
  put("photons_per_mode", preset.photons_per_mode(), "1");
  put("theta_over_kappa", preset.theta_over_kappa(), "1");
  put("crossover_temperature", preset.crossover_temperature(), "K");
  put("n_thermal", preset.n_thermal(), "1");
  put("heating_rate_over_2pi", preset.heating_rate_over_2pi(), "Hz");
  if (gamma_a) {
    const double gamma_c = absorption_rate(kTwoPi * coupling, 1.0, kTwoPi * *gamma_a);
    put("gamma_a_over_2pi", *gamma_a, "Hz");
    put("absorption_rate_over_2pi", gamma_c / kTwoPi, "Hz");
    put("thermal_suppression", thermal_suppression(kTwoPi * preset.kappa_over_2pi, gamma_c), "1");
  }

  RunResult res;
  if (cfg.format == OutputFormat::Csv) {
    Table t;
    t.add_text("quantity", names);
    t.add("value", values);
    t.add_text("unit", units);
    res.files.push_back(write_table(t, cfg.output_dir, "feasibility", cfg.format));
  } else {
    ojson doc = ojson::object();
    for (std::size_t i = 0; i < names.size(); ++i) doc[names[i]] = {{"value", values[i]}, {"unit", units[i]}};
    for (double v : values) {
      if (!std::isfinite(v)) throw NumericalError("non-finite feasibility value");
    }
    res.files.push_back(write_record(doc, cfg.output_dir, "feasibility"));
  }
  res.summary = {{"command", "feasibility"}, {"t_pi_s", preset.t_pi()}, {"epsilon", preset.epsilon()}};
  return res;
}

struct Check {
  std::string name;
  double measured;
  double threshold;
  std::string relation;  // "<=" or ">="
  bool pass() const { return relation == "<=" ? measured <= threshold : measured >= threshold; }
};

RunResult run_validate(const RunConfig& cfg, const Params& p) {
  const double cap = p.number("dimension_cap_count", 2e4);
  const std::string mutation = p.text("mutation", "none");
  if (mutation != "none" && mutation != "wrong_mode") {
    throw ConfigError("mutation must be \"none\" or \"wrong_mode\"");
  }
  std::vector<int> dims = {24, 24, 10};
  if (p.has("fock_dims_count")) {
    const auto d = p.numbers("fock_dims_count");
    if (d.size() != 3) throw ConfigError("fock_dims_count needs three entries");
    dims.clear();
    for (double x : d) {
      if (x != std::floor(x) || x < 2) throw ConfigError("fock_dims_count entries must be integers >= 2");
      dims.push_back(static_cast<int>(x));
    }
  }
  p.require_all_used();

  const ModeLayout layout(dims);
  const double atomic_dim = static_cast<double>(AtomicBasis(2, 2).layout().composite_dim());
  const double need = std::max(static_cast<double>(layout.composite_dim()), atomic_dim);
  if (need > cap) {
    std::ostringstream msg;
    msg << "validation needs " << need << " basis states (cap " << cap << "); estimated memory "
        << need * 16.0 * 50.0 / 1e6 << " MB for states and Krylov workspace";
    throw ConfigError(msg.str());
  }

  std::vector<Check> checks;

  {
    const auto c = EffectiveCouplings::from_ratio(3.0, 1.0);
    const std::vector<double> times = linspace(0.0, 2.0 * t_pi(c), 41);
    const FockOperator h = mutation == "wrong_mode" ? corrupted_hamiltonian(c, layout)
                                                           : build_effective_hamiltonian(c, layout);
    const FockOperator nop = conserved_charge(layout);
    const FockOperator n2op = nop * nop;
    double n_mean = 0.0, n_sq = 0.0, occ_dev = 0.0, fid_min = 1.0;
    EvolveOptions opts;
    opts.max_step = 0.01 / c.theta();
    opts.observer = [&](std::size_t i, double t, const FockState& s) {
      n_mean = std::max(n_mean, std::abs(expectation(s, nop)));
      n_sq = std::max(n_sq, std::abs(expectation(s, n2op)));
      const Occupations a = occupations_closed_form(c, t);
      occ_dev = std::max({occ_dev, std::abs(mean_occupation(s, kCavity1) - a.n1),
                          std::abs(mean_occupation(s, kCavity2) - a.n2), std::abs(mean_occupation(s, kSpin) - a.n3)});
      const FockState ref = evolved_amplitudes(c, t, dims[2] - 1, dims[1] - 1, 1e-6).to_state(layout);
      const double f = std::norm(ref.amplitudes().dot(s.amplitudes())) / ref.amplitudes().squaredNorm();
      fid_min = std::min(fid_min, f);
      (void)i;
    };
    opts.keep_states = false;
    const Trajectory traj = evolve_state(h, FockState::vacuum(layout), times, opts);
    double drift = 0.0;
    for (double nv : traj.norm) drift = std::max(drift, std::abs(nv - 1.0));
    checks.push_back({"conserved_charge_mean", n_mean, 1e-8, "<="});
    checks.push_back({"conserved_charge_square", n_sq, 1e-8, "<="});
    checks.push_back({"norm_drift", drift, 1e-8, "<="});
    checks.push_back({"fock_vs_analytic_occupation", occ_dev, 1e-6, "<="});
    checks.push_back({"fock_vs_analytic_fidelity", fid_min, 1.0 - 1e-6, ">="});
  }
  {
    const auto c = EffectiveCouplings::from_ratio(1.1, 1.0);
    const std::vector<double> times = linspace(0.0, 2.0 * t_pi(c), 201);
    const auto moments = evolve_moments(drift_matrix(c, {}), MomentMatrix::vacuum(), times);
    double dev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const Occupations g = occupations_from_moments(moments[i]);
      const Occupations a = occupations_closed_form(c, times[i]);
      dev = std::max({dev, std::abs(g.n1 - a.n1) / (1.0 + a.n1), std::abs(g.n2 - a.n2) / (1.0 + a.n2),
                      std::abs(g.n3 - a.n3) / (1.0 + a.n3)});
    }
    checks.push_back({"gaussian_vs_analytic_occupation", dev, 1e-8, "<="});
    checks.push_back({"gaussian_zeta12_at_t_pi", zeta12_from_moments(moments[100]), 1e-8, "<="});
  }
  {
    const DecayRates d = DecayRates::shared(1.0);
    const auto grid = default_grid(0.0, 1.0);
    const SpectrumResult shot = squeezing_spectrum(Couplings{}, d, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      worst = std::max({worst, std::abs(shot.s_plus[i] - 1.0), std::abs(shot.s_minus[i] - 1.0)});
    }
    checks.push_back({"shot_noise_calibration", worst, 1e-10, "<="});
    const auto c = EffectiveCouplings::from_ratio(1.1, 1.0);
    const SpectrumResult s = squeezing_spectrum(c, d, default_grid(1.0, 1.0));
    double asym = 0.0;
    const std::size_t n = s.omega.size();
    for (std::size_t i = 0; i < n; ++i) {
      asym = std::max({asym, std::abs(s.s_plus[i] - s.s_plus[n - 1 - i]), std::abs(s.s_minus[i] - s.s_minus[n - 1 - i])});
    }
    checks.push_back({"spectrum_symmetry", asym, 1e-8, "<="});
    const Matrix6 a = spectral_steady_state(c, d);
    const Matrix6 b = lyapunov_steady_state(c, d);
    checks.push_back({"parseval_consistency", (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(), 0.01, "<="});
  }
  {
    std::vector<std::future<AdiabaticReport>> jobs;
    const std::pair<int, double> points[] = {{1, 10.0}, {1, 20.0}, {1, 40.0}, {2, 20.0}};
    for (const auto& [n_atoms, ratio] : points) {
      jobs.push_back(std::async(std::launch::async, [n_atoms, ratio] {
        const RamanConfig rc = RamanConfig::dispersive(ratio, 1.1, 1.0, n_atoms, 2);
        return adiabatic_error(rc, effective_t_pi(rc), kAdiabaticSamples);
      }));
    }
    std::vector<AdiabaticReport> reps;
    for (auto& j : jobs) reps.push_back(j.get());
    checks.push_back({"adiabatic_n1_ratio20", reps[1].max_occupation_deviation, kAdiabaticToleranceN1Ratio20, "<="});
    checks.push_back({"adiabatic_n2_ratio20", reps[3].max_occupation_deviation, kAdiabaticToleranceN2Ratio20, "<="});
    const double mono = std::max(reps[1].max_occupation_deviation - reps[0].max_occupation_deviation,
                                 reps[2].max_occupation_deviation - reps[1].max_occupation_deviation);
    checks.push_back({"adiabatic_monotone_decrease", mono, 0.0, "<="});
  }
  {
    const AtomicBasis basis(2, 2);
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(basis.layout().composite_dim());
    const Level hg[2] = {Level::H, Level::G};
    const Level gh[2] = {Level::G, Level::H};
    amps[basis.index(hg, 0, 0)] = 1.0 / std::sqrt(2.0);
    amps[basis.index(gh, 0, 0)] = 1.0 / std::sqrt(2.0);
    const double res = bosonization_residual(basis, FockState(basis.layout(), amps));
    checks.push_back({"bosonization_one_excitation", std::abs(res - 1.0), 1e-12, "<="});
  }
  {
    const ExperimentPreset preset = rb_preset();
    checks.push_back({"preset_t_pi", std::abs(preset.t_pi() / 50e-6 - 1.0), 1e-3, "<="});
    checks.push_back({"preset_epsilon", std::abs(preset.epsilon() - 3.04), 0.01, "<="});
    checks.push_back({"preset_photons", std::abs(preset.photons_per_mode() - 109.75), 0.01, "<="});
  }

  RunResult res;
  Table t;
  std::vector<std::string> names, rel, pass;
  std::vector<double> measured, threshold;
  bool ok = true;
  for (const auto& c : checks) {
    names.push_back(c.name);
    measured.push_back(c.measured);
    threshold.push_back(c.threshold);
    rel.push_back(c.relation);
    pass.push_back(c.pass() ? "pass" : "fail");
    ok = ok && c.pass();
  }
  t.add_text("check", names);
  t.add("measured", measured);
  t.add_text("relation", rel);
  t.add("threshold", threshold);
  t.add_text("status", pass);
  res.files.push_back(write_table(t, cfg.output_dir, "validate", cfg.format));
  res.summary = {{"command", "validate"}, {"mutation", mutation}, {"checks", checks.size()},
                 {"failed", std::count(pass.begin(), pass.end(), "fail")}};
  res.exit_code = ok ? kSuccess : kValidationFailure;
  return res;
}

RunResult run_sweep(const RunConfig& cfg, const Params& p) {
  const std::vector<double> rs = p.has("r_ratio") ? p.numbers("r_ratio") : std::vector<double>{};
  const std::vector<double> tk = p.has("theta_over_kappa_ratio") ? p.numbers("theta_over_kappa_ratio") : std::vector<double>{};
  const std::vector<double> temps = p.has("temperature_k") ? p.numbers("temperature_k") : std::vector<double>{};
  if (rs.empty() && tk.empty() && temps.empty()) {
    throw ConfigError("sweep needs at least one of r_ratio, theta_over_kappa_ratio, temperature_k");
  }
  const double theta = p.angular("theta_hz", 10e3);
  const double frequency = p.number("frequency_hz", 6.83e9);
  std::optional<double> gamma_c;
  if (p.has("gamma_c_hz")) gamma_c = p.angular("gamma_c_hz");
  const double kappa_base = p.angular("kappa_hz", 7e3);
  std::vector<std::string> outputs;
  if (p.has("outputs")) {
    outputs = p.texts("outputs");
  } else {
    outputs = {"epsilon", "t_pi"};
    if (!tk.empty()) outputs.push_back("min_s");
    if (!temps.empty()) outputs.push_back("n_thermal");
    if (gamma_c) outputs.push_back("suppression");
  }
  for (const auto& o : outputs) {
    if (o != "epsilon" && o != "t_pi" && o != "min_s" && o != "n_thermal" && o != "suppression") {
      throw ConfigError("unknown sweep output '" + o + "'");
    }
    if (o == "suppression" && !gamma_c) throw ConfigError("output 'suppression' needs gamma_c_hz");
  }
  p.require_all_used();
  if (!(theta > 0.0)) throw ConfigError("theta_hz must be positive");

  struct Point {
    double r, theta_over_kappa, temperature;
  };
  std::vector<Point> grid;
  const std::vector<double> r_axis = rs.empty() ? std::vector<double>{1.1} : rs;
  const std::vector<double> tk_axis = tk.empty() ? std::vector<double>{theta / kappa_base} : tk;
  const std::vector<double> t_axis = temps.empty() ? std::vector<double>{0.1} : temps;
  for (double r : r_axis) {
    if (!(r > 1.0)) throw ConfigError("r_ratio grid values must exceed 1");
    for (double x : tk_axis) {
      if (!(x > 0.0)) throw ConfigError("theta_over_kappa_ratio grid values must be positive");
      for (double tt : t_axis) {
        if (!(tt > 0.0)) throw ConfigError("temperature_k grid values must be positive");
        grid.push_back({r, x, tt});
      }
    }
  }

  using Row = std::vector<std::pair<std::string, double>>;
  auto evaluate = [&](const Point& pt) {
    Row row;
    for (const auto& o : outputs) {
      double v = 0.0;
      if (o == "epsilon") {
        v = squeezing_parameter(pt.r);
        const double oracle = std::log((pt.r + 1.0) / (pt.r - 1.0));
        if (std::abs(v - oracle) > 1e-12 * std::max(1.0, oracle)) {
          throw NumericalError("squeezing parameter disagrees with ln((r+1)/(r-1)) at r = " + format_number(pt.r));
        }
      } else if (o == "t_pi") {
        v = t_pi_from_theta(theta);
      } else if (o == "min_s") {
        const double kappa = theta / pt.theta_over_kappa;
        const auto c = EffectiveCouplings::from_ratio(pt.r, theta);
        v = squeezing_spectrum(c, DecayRates::shared(kappa), default_grid(theta, kappa)).min_s_plus();
      } else if (o == "n_thermal") {
        v = thermal_occupation(frequency, pt.temperature);
      } else {
        v = thermal_suppression(theta / pt.theta_over_kappa, *gamma_c);
      }
      row.emplace_back(o, v);
    }
    return row;
  };
  std::vector<std::future<Row>> jobs;
  for (const auto& pt : grid) jobs.push_back(std::async(std::launch::async, evaluate, pt));
  std::vector<Row> rows;
  for (auto& j : jobs) rows.push_back(j.get());

  std::vector<double> idx, r_col, tk_col, t_col, val;
  std::vector<std::string> quantity;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (const auto& [name, v] : rows[i]) {
      idx.push_back(static_cast<double>(i));
      r_col.push_back(grid[i].r);
      tk_col.push_back(grid[i].theta_over_kappa);
      t_col.push_back(grid[i].temperature);
      quantity.push_back(name);
      val.push_back(v);
    }
  }
  Table t;
  t.add("point", idx);
  t.add("r", r_col);
  t.add("theta_over_kappa", tk_col);
  t.add("temperature_k", t_col);
  t.add_text("quantity", quantity);
  t.add("value", val);
  RunResult res;
  res.files.push_back(write_table(t, cfg.output_dir, "sweep", cfg.format));
  res.summary = {{"command", "sweep"}, {"points", grid.size()}, {"rows", val.size()}};
  return res;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_string(Command c) {
  switch (c) {
    case Command::Evolve:
      return "evolve";
    case Command::Spectrum:
      return "spectrum";
    case Command::Feasibility:
      return "feasibility";
    case Command::Validate:
      return "validate";
    case Command::Sweep:
      return "sweep";
  }
  return "evolve";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::Evolve, Command::Spectrum, Command::Feasibility, Command::Validate, Command::Sweep}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown command '" + name + "'");
}

RunConfig parse_config(Command command, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  cfg.command = command;
  cfg.source = doc;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    if (key == "parameters") {
      if (!it->is_object()) throw ConfigError("'parameters' must be an object");
      cfg.parameters = *it;
    } else if (key == "output_format") {
      const std::string f = it->is_string() ? it->get<std::string>() : "";
      if (f == "csv") {
        cfg.format = OutputFormat::Csv;
      } else if (f == "json") {
        cfg.format = OutputFormat::Json;
      } else {
        throw ConfigError("output_format must be \"csv\" or \"json\"");
      }
    } else if (key == "output_dir") {
      if (!it->is_string()) throw ConfigError("output_dir must be a string");
      cfg.output_dir = it->get<std::string>();
    } else {
      throw ConfigError("unknown top-level key '" + key + "'");
    }
  }
  for (auto it = cfg.parameters.begin(); it != cfg.parameters.end(); ++it) {
    const std::string& key = it.key();
    if (kStringKeys.count(key) || kListKeys.count(key)) continue;
    const bool numeric = it->is_number() || (it->is_array() && std::all_of(it->begin(), it->end(), [](const auto& v) {
                                                return v.is_number();
                                              }));
    if (!numeric) throw ConfigError("parameter '" + key + "' must be numeric");
    if (!unit_suffixed(key)) {
      throw ConfigError("parameter '" + key + "' lacks a unit suffix (_hz, _s, _k, _tpi, _ratio, _count)");
    }
  }
  return cfg;
}

RunConfig load_config(Command command, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(command, doc);
}

RunResult run(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + config.output_dir.string());
  const Params p(config.parameters);
  RunResult res;
  try {
    switch (config.command) {
      case Command::Evolve:
        res = run_evolve(config, p);
        break;
      case Command::Spectrum:
        res = run_spectrum(config, p);
        break;
      case Command::Feasibility:
        res = run_feasibility(config, p);
        break;
      case Command::Validate:
        res = run_validate(config, p);
        break;
      case Command::Sweep:
        res = run_sweep(config, p);
        break;
    }
  } catch (const CutoffError& e) {
    throw NumericalError(e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  ojson manifest;
  manifest["command"] = to_string(config.command);
  manifest["version"] = CAVSQ_VERSION;
  manifest["config"] = ojson::parse(config.source.dump());
  ojson files = ojson::array();
  for (const auto& f : res.files) files.push_back(f.filename().string());
  manifest["outputs"] = files;
  manifest["exit_code"] = res.exit_code;
  manifest["summary"] = res.summary;
  res.files.push_back(write_record(manifest, config.output_dir, to_string(config.command) + ".manifest"));
  return res;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Two-mode squeezing in a hybrid cold-atom / transmission-line resonator system", "cavsq"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CAVSQ_VERSION);
  std::string config_path;
  std::string output_dir;
  const char* names[] = {"evolve", "spectrum", "feasibility", "validate", "sweep"};
  const char* help[] = {"time evolution from vacuum (fock, gaussian, analytic or all routes)",
                        "output squeezing spectrum and regime classification",
                        "experimental estimates for the Rb preset", "validation suite with pass/fail report",
                        "parameter sweep in long format"};
  for (int i = 0; i < 5; ++i) {
    auto* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("config", config_path, "JSON config file")->required();
    sub->add_option("--output-dir", output_dir, "output directory (overrides the config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigurationError;
  }
  const std::string command_name = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = load_config(parse_command(command_name), config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    const RunResult res = run(cfg);
    for (const auto& f : res.files) std::cout << f.string() << '\n';
    if (res.exit_code == kValidationFailure) std::cerr << "validation failed\n";
    return res.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigurationError;
  } catch (const StabilityError& e) {
    std::cerr << "stability error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const ArgumentError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigurationError;
  }
}

}  // namespace cavsq::cli
