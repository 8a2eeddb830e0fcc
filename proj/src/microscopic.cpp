#include "cavsq/microscopic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>

#include "cavsq/errors.hpp"

namespace cavsq {

namespace {

using Triplet = Eigen::Triplet<cplx>;

// One raising term A_k e^{i w_k t} of the full Hamiltonian, in the compressed basis.
struct RaisingTerm {
  double frequency;
  cplx amplitude;
  SparseMatrix op;  // unit-amplitude operator
};

struct Compressed {
  std::vector<Eigen::Index> product;                 // compressed -> product index
  std::map<Eigen::Index, Eigen::Index> lookup;       // product -> compressed
  std::vector<Eigen::Index> ground;                  // compressed indices of ground states
  Eigen::VectorXd n1, n2, nh, ne;
};

Compressed compress(const AtomicBasis& basis) {
  Compressed c;
  c.product = basis.states();
  const auto m = static_cast<Eigen::Index>(c.product.size());
  c.n1.resize(m);
  c.n2.resize(m);
  c.nh.resize(m);
  c.ne.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index p = c.product[i];
    c.lookup[p] = i;
    c.n1[i] = basis.layout().occupation(p, basis.cavity1_mode());
    c.n2[i] = basis.layout().occupation(p, basis.cavity2_mode());
    int h = 0, e = 0;
    for (int a = 0; a < basis.n_atoms(); ++a) {
      const Level l = basis.level(p, a);
      h += l == Level::H;
      e += (l == Level::E1 || l == Level::E2);
    }
    c.nh[i] = h;
    c.ne[i] = e;
    if (e == 0) c.ground.push_back(i);
  }
  return c;
}

// Builds the four raising terms: W1 |e1><g|, W2 |e2><h|, g1 a1 |e1><h|, g2 a2 |e2><g|.
std::vector<RaisingTerm> raising_terms(const RamanConfig& cfg, const AtomicBasis& basis, const Compressed& c) {
  struct Spec {
    Level from, to;
    int cavity;  // 0 none, 1 or 2 annihilated
    cplx amplitude;
    double frequency;
  };
  const Spec specs[4] = {
      {Level::G, Level::E1, 0, cfg.omega1_rabi, cfg.delta1},
      {Level::H, Level::E2, 0, cfg.omega2_rabi, cfg.delta2},
      {Level::H, Level::E1, 1, cfg.g1, cfg.delta1},
      {Level::G, Level::E2, 2, cfg.g2, cfg.delta2 - cfg.delta_two_photon},
  };
  const ModeLayout& layout = basis.layout();
  const auto m = static_cast<Eigen::Index>(c.product.size());
  std::vector<RaisingTerm> out;
  for (const Spec& s : specs) {
    std::vector<Triplet> trip;
    for (Eigen::Index i = 0; i < m; ++i) {
      std::vector<int> occ = layout.occupations(c.product[i]);
      for (int a = 0; a < basis.n_atoms(); ++a) {
        if (occ[a] != static_cast<int>(s.from)) continue;
        std::vector<int> next = occ;
        next[a] = static_cast<int>(s.to);
        double factor = 1.0;
        if (s.cavity != 0) {
          const std::size_t mode = s.cavity == 1 ? basis.cavity1_mode() : basis.cavity2_mode();
          if (next[mode] == 0) continue;
          factor = std::sqrt(static_cast<double>(next[mode]));
          --next[mode];
        }
        const auto it = c.lookup.find(layout.index(next));
        if (it == c.lookup.end()) continue;
        trip.emplace_back(it->second, i, factor);
      }
    }
    SparseMatrix op(m, m);
    op.setFromTriplets(trip.begin(), trip.end());
    out.push_back({s.frequency, s.amplitude, std::move(op)});
  }
  return out;
}

// Terms of equal frequency merged, zero-amplitude terms dropped.
struct FrequencyGroup {
  double frequency;
  SparseMatrix op;
  SparseMatrix op_adj;
};

std::vector<FrequencyGroup> group_terms(const std::vector<RaisingTerm>& terms) {
  std::vector<FrequencyGroup> groups;
  for (const auto& t : terms) {
    if (t.amplitude == cplx{}) continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.frequency == t.frequency; });
    if (it == groups.end()) {
      groups.push_back({t.frequency, t.amplitude * t.op, {}});
    } else {
      it->op += t.amplitude * t.op;
    }
  }
  for (auto& g : groups) g.op_adj = g.op.adjoint();
  return groups;
}

// Ground-block pair products entering the effective Hamiltonian.
struct EffectivePart {
  double frequency;  // D_m - D_n
  Eigen::MatrixXcd block;
};

std::vector<EffectivePart> effective_parts(const RamanConfig& cfg, const AtomicBasis& basis, const Compressed& c,
                                           bool light_shifts) {
  const auto terms = raising_terms(cfg, basis, c);
  const auto g = static_cast<Eigen::Index>(c.ground.size());
  Eigen::MatrixXcd select = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(c.product.size()), g);
  for (Eigen::Index k = 0; k < g; ++k) select(c.ground[k], k) = 1.0;

  std::vector<EffectivePart> parts;
  for (std::size_t mi = 0; mi < terms.size(); ++mi) {
    for (std::size_t ni = 0; ni < terms.size(); ++ni) {
      if (!light_shifts && mi == ni) continue;
      const auto& tm = terms[mi];
      const auto& tn = terms[ni];
      if (tm.amplitude == cplx{} || tn.amplitude == cplx{}) continue;
      if (tm.frequency == 0.0 || tn.frequency == 0.0) {
        throw ArgumentError("driven transition with zero detuning cannot be eliminated adiabatically");
      }
      const SparseMatrix prod = SparseMatrix(tn.op.adjoint()) * tm.op;
      Eigen::MatrixXcd block = select.adjoint() * (prod * select);
      if (block.cwiseAbs().maxCoeff() == 0.0) continue;
      const cplx coef = -0.5 * (1.0 / tm.frequency + 1.0 / tn.frequency) * std::conj(tn.amplitude) * tm.amplitude;
      const double freq = tm.frequency - tn.frequency;
      auto it = std::find_if(parts.begin(), parts.end(), [&](const auto& p) { return p.frequency == freq; });
      if (it == parts.end()) {
        parts.push_back({freq, coef * block});
      } else {
        it->block += coef * block;
      }
    }
  }
  return parts;
}

Eigen::MatrixXcd effective_at(const std::vector<EffectivePart>& parts, Eigen::Index dim, double t) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& p : parts) h += std::exp(cplx(0.0, p.frequency * t)) * p.block;
  return h;
}

template <typename Apply>
void rk4_step(Eigen::VectorXcd& psi, double t, double dt, Apply&& hpsi) {
  const cplx mi(0.0, -1.0);
  const Eigen::VectorXcd k1 = mi * hpsi(t, psi);
  const Eigen::VectorXcd k2 = mi * hpsi(t + 0.5 * dt, psi + 0.5 * dt * k1);
  const Eigen::VectorXcd k3 = mi * hpsi(t + 0.5 * dt, psi + 0.5 * dt * k2);
  const Eigen::VectorXcd k4 = mi * hpsi(t + dt, psi + dt * k3);
  psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Evolves the effective model and returns the state at each sample time.
class EffectiveEvolution {
 public:
  EffectiveEvolution(std::vector<EffectivePart> parts, Eigen::Index dim) : parts_(std::move(parts)), dim_(dim) {
    static_ = std::all_of(parts_.begin(), parts_.end(), [](const auto& p) { return p.frequency == 0.0; });
    if (static_) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(effective_at(parts_, dim_, 0.0));
      vecs_ = es.eigenvectors();
      vals_ = es.eigenvalues();
    }
  }

  bool is_static() const noexcept { return static_; }

  Eigen::VectorXcd exact(const Eigen::VectorXcd& psi0, double t) const {
    Eigen::VectorXcd modal = vecs_.adjoint() * psi0;
    for (Eigen::Index k = 0; k < modal.size(); ++k) modal[k] *= std::exp(cplx(0.0, -vals_[k] * t));
    return vecs_ * modal;
  }

  Eigen::VectorXcd apply(double t, const Eigen::VectorXcd& psi) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim_);
    for (const auto& p : parts_) out += std::exp(cplx(0.0, p.frequency * t)) * (p.block * psi);
    return out;
  }

 private:
  std::vector<EffectivePart> parts_;
  Eigen::Index dim_;
  bool static_ = true;
  Eigen::MatrixXcd vecs_;
  Eigen::VectorXd vals_;
};

}  // namespace

double RamanConfig::dispersive_ratio() const {
  const double num = std::min({std::abs(delta1), std::abs(delta2), std::abs(delta1 - delta2)});
  const double den = std::max({std::abs(omega1_rabi), std::abs(omega2_rabi), std::abs(g1), std::abs(g2)});
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

RamanConfig RamanConfig::dispersive(double ratio, double r, double coupling, int n_atoms, int excitation_cap) {
  if (!(ratio > 0.0) || !(r > 0.0) || !(coupling > 0.0)) throw ArgumentError("dispersive preset needs positive inputs");
  RamanConfig cfg;
  cfg.omega1_rabi = coupling;
  cfg.omega2_rabi = r * coupling;
  cfg.g1 = coupling;
  cfg.g2 = coupling;
  const double big = ratio * std::max(1.0, r) * coupling;
  cfg.delta1 = big;
  cfg.delta2 = -big;
  cfg.n_atoms = n_atoms;
  cfg.excitation_cap = excitation_cap;
  return cfg;
}

AtomicBasis::AtomicBasis(int n_atoms, int excitation_cap)
    : n_atoms_(n_atoms), cap_(excitation_cap), layout_(std::vector<int>{2}) {
  if (n_atoms < 1 || n_atoms > 8) throw ArgumentError("atomic basis supports 1 to 8 atoms");
  if (excitation_cap < 2) throw ArgumentError("excitation cap must be at least 2");
  std::vector<int> dims(static_cast<std::size_t>(n_atoms), 4);
  dims.push_back(excitation_cap + 1);
  dims.push_back(excitation_cap + 1);
  layout_ = ModeLayout(dims);
  const Eigen::Index total = layout_.composite_dim();
  retained_.assign(static_cast<std::size_t>(total), 0);
  for (Eigen::Index p = 0; p < total; ++p) {
    const auto occ = layout_.occupations(p);
    int h = 0;
    bool ground = true;
    for (int a = 0; a < n_atoms; ++a) {
      ground = ground && occ[a] <= 1;
      h += occ[a] == 1;
    }
    if (!ground || occ[n_atoms] + occ[n_atoms + 1] + h > excitation_cap) continue;
    retained_[p] = 1;
    // Intermediate neighbours reached by a single raising step.
    for (int a = 0; a < n_atoms; ++a) {
      auto next = occ;
      if (occ[a] == 0) {
        next[a] = 2;
        retained_[layout_.index(next)] = 1;
        next[a] = 3;
        if (occ[n_atoms + 1] > 0) {
          --next[n_atoms + 1];
          retained_[layout_.index(next)] = 1;
        }
      } else {
        next[a] = 3;
        retained_[layout_.index(next)] = 1;
        next[a] = 2;
        if (occ[n_atoms] > 0) {
          --next[n_atoms];
          retained_[layout_.index(next)] = 1;
        }
      }
    }
  }
  for (Eigen::Index p = 0; p < total; ++p) {
    if (!retained_[p]) continue;
    states_.push_back(p);
    bool ground = true;
    for (int a = 0; a < n_atoms; ++a) ground = ground && layout_.occupation(p, a) <= 1;
    if (ground) ground_.push_back(p);
  }
}

bool AtomicBasis::contains(Eigen::Index product_index) const {
  return product_index >= 0 && product_index < layout_.composite_dim() && retained_[product_index];
}

Level AtomicBasis::level(Eigen::Index product_index, int atom) const {
  if (atom < 0 || atom >= n_atoms_) throw ArgumentError("atom index out of range");
  return static_cast<Level>(layout_.occupation(product_index, static_cast<std::size_t>(atom)));
}

Eigen::Index AtomicBasis::index(std::span<const Level> levels, int n1, int n2) const {
  if (static_cast<int>(levels.size()) != n_atoms_) throw ArgumentError("one level per atom required");
  std::vector<int> occ;
  for (Level l : levels) occ.push_back(static_cast<int>(l));
  occ.push_back(n1);
  occ.push_back(n2);
  return layout_.index(occ);
}

FockState AtomicBasis::initial_state() const { return FockState::vacuum(layout_); }

FockOperator build_full_hamiltonian(const RamanConfig& cfg, const AtomicBasis& basis, double t) {
  const Compressed c = compress(basis);
  const auto terms = raising_terms(cfg, basis, c);
  std::vector<Triplet> trip;
  for (const auto& term : terms) {
    const cplx coef = term.amplitude * std::exp(cplx(0.0, term.frequency * t));
    if (coef == cplx{}) continue;
    for (int k = 0; k < term.op.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(term.op, k); it; ++it) {
        const Eigen::Index row = c.product[it.row()];
        const Eigen::Index col = c.product[it.col()];
        trip.emplace_back(row, col, coef * it.value());
        trip.emplace_back(col, row, std::conj(coef * it.value()));
      }
    }
  }
  const Eigen::Index n = basis.layout().composite_dim();
  SparseMatrix h(n, n);
  h.setFromTriplets(trip.begin(), trip.end());
  return FockOperator(basis.layout(), std::move(h));
}

std::pair<cplx, cplx> effective_couplings(const RamanConfig& cfg) {
  if (cfg.delta1 == 0.0 || cfg.delta2 == 0.0) throw ArgumentError("effective couplings need nonzero detunings");
  if (cfg.n_atoms < 1) throw ArgumentError("n_atoms must be positive");
  const double root_n = std::sqrt(static_cast<double>(cfg.n_atoms));
  return {root_n * std::conj(cfg.omega1_rabi) * cfg.g1 / cfg.delta1,
          root_n * std::conj(cfg.omega2_rabi) * cfg.g2 / cfg.delta2};
}

FockOperator effective_ground_hamiltonian(const RamanConfig& cfg, const AtomicBasis& basis, double t,
                                          bool light_shifts) {
  const Compressed c = compress(basis);
  const auto parts = effective_parts(cfg, basis, c, light_shifts);
  const auto g = static_cast<Eigen::Index>(c.ground.size());
  const Eigen::MatrixXcd h = effective_at(parts, g, t);
  std::vector<Triplet> trip;
  for (Eigen::Index j = 0; j < g; ++j) {
    for (Eigen::Index i = 0; i < g; ++i) {
      if (h(i, j) != cplx{}) trip.emplace_back(c.product[c.ground[i]], c.product[c.ground[j]], h(i, j));
    }
  }
  const Eigen::Index n = basis.layout().composite_dim();
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return FockOperator(basis.layout(), std::move(m));
}

double effective_t_pi(const RamanConfig& cfg) {
  const auto [b1, b2] = effective_couplings(cfg);
  const double theta2 = std::norm(b2) - std::norm(b1);
  if (!(theta2 > 0.0)) throw ArgumentError("effective couplings need |beta2| > |beta1|");
  return kPi / std::sqrt(theta2);
}

AdiabaticReport adiabatic_error(const RamanConfig& cfg, double horizon, int samples) {
  if (cfg.n_atoms < 1 || cfg.n_atoms > 4) throw ArgumentError("adiabatic validation supports 1 to 4 atoms");
  if (cfg.excitation_cap < 2 || cfg.excitation_cap > 3) throw ArgumentError("excitation cap must be 2 or 3");
  if (!(horizon > 0.0)) throw ArgumentError("horizon must be positive");
  if (samples < 2) throw ArgumentError("need at least 2 samples");

  const AtomicBasis basis(cfg.n_atoms, cfg.excitation_cap);
  const Compressed c = compress(basis);
  const auto groups = group_terms(raising_terms(cfg, basis, c));
  const auto gdim = static_cast<Eigen::Index>(c.ground.size());

  double max_freq = 0.0;
  for (const auto& g : groups) max_freq = std::max(max_freq, std::abs(g.frequency));
  const double dt_max = max_freq > 0.0 ? kTwoPi / max_freq / 400.0 : horizon / 1000.0;
  const double interval = horizon / (samples - 1);
  const long per_sample = std::max(1L, static_cast<long>(std::ceil(interval / dt_max)));
  const double dt = interval / static_cast<double>(per_sample);

  AdiabaticReport rep;
  rep.dispersive_ratio = cfg.dispersive_ratio();
  rep.steps = per_sample * (samples - 1);

  const bool driven = !groups.empty();
  std::optional<EffectiveEvolution> shifted, bare;
  if (driven) {
    shifted.emplace(effective_parts(cfg, basis, c, true), gdim);
    bare.emplace(effective_parts(cfg, basis, c, false), gdim);
  }

  const auto m = static_cast<Eigen::Index>(c.product.size());
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(m);
  Eigen::VectorXcd eff0 = Eigen::VectorXcd::Zero(gdim);
  for (Eigen::Index k = 0; k < gdim; ++k) {
    if (c.product[c.ground[k]] == 0) {
      eff0[k] = 1.0;
      psi[c.ground[k]] = 1.0;
    }
  }
  Eigen::VectorXcd eff = eff0, eff_bare = eff0;

  Eigen::VectorXd gn1(gdim), gn2(gdim), gnh(gdim);
  for (Eigen::Index k = 0; k < gdim; ++k) {
    gn1[k] = c.n1[c.ground[k]];
    gn2[k] = c.n2[c.ground[k]];
    gnh[k] = c.nh[c.ground[k]];
  }

  auto full_apply = [&](double t, const Eigen::VectorXcd& y) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(m);
    for (const auto& g : groups) {
      const cplx ph = std::exp(cplx(0.0, g.frequency * t));
      out += ph * (g.op * y) + std::conj(ph) * (g.op_adj * y);
    }
    return out;
  };
  auto deviation = [&](const Eigen::VectorXd& p, const Eigen::VectorXcd& e) {
    const Eigen::VectorXd q = e.cwiseAbs2();
    return std::max({std::abs(p.dot(c.n1) - q.dot(gn1)), std::abs(p.dot(c.n2) - q.dot(gn2)),
                     std::abs(p.dot(c.nh) - q.dot(gnh))});
  };

  double t = 0.0;
  for (int s = 0; s < samples; ++s) {
    if (s > 0) {
      for (long k = 0; k < per_sample; ++k) {
        if (driven) rk4_step(psi, t, dt, full_apply);
        if (shifted && !shifted->is_static()) {
          rk4_step(eff, t, dt, [&](double tt, const Eigen::VectorXcd& y) { return shifted->apply(tt, y); });
        }
        if (bare && !bare->is_static()) {
          rk4_step(eff_bare, t, dt, [&](double tt, const Eigen::VectorXcd& y) { return bare->apply(tt, y); });
        }
        t = (static_cast<double>(s - 1) * static_cast<double>(per_sample) + static_cast<double>(k + 1)) * dt;
      }
      t = interval * s;
      if (shifted && shifted->is_static()) eff = shifted->exact(eff0, t);
      if (bare && bare->is_static()) eff_bare = bare->exact(eff0, t);
    }
    const Eigen::VectorXd p = psi.cwiseAbs2();
    rep.max_norm_drift = std::max(rep.max_norm_drift, std::abs(psi.norm() - 1.0));
    rep.max_intermediate_population = std::max(rep.max_intermediate_population, p.dot(c.ne));
    rep.max_occupation_deviation = std::max(rep.max_occupation_deviation, deviation(p, eff));
    rep.bare_occupation_deviation = std::max(rep.bare_occupation_deviation, deviation(p, eff_bare));
    const Eigen::VectorXd q = eff.cwiseAbs2();
    rep.peak_occupation = std::max({rep.peak_occupation, q.dot(gn1), q.dot(gn2)});
  }
  if (rep.max_norm_drift > 1e-8) {
    throw NumericalError("time-dependent integration lost norm beyond 1e-8 (drift " +
                         std::to_string(rep.max_norm_drift) + ")");
  }
  return rep;
}

double bosonization_residual(const AtomicBasis& basis, const FockState& state) {
  if (!(state.layout() == basis.layout())) throw ArgumentError("state does not live on the atomic basis");
  const int n = basis.n_atoms();
  const double value = diagonal_expectation(state, [&](const ModeLayout& layout, Eigen::Index k) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
      const int l = layout.occupation(k, static_cast<std::size_t>(a));
      acc += (l == 0) - (l == 1);
    }
    return acc / n;
  });
  return std::abs(value / std::max(state.norm() * state.norm(), 1e-300) - 1.0);
}

}  // namespace cavsq
