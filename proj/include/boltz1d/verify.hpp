#pragma once

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "inequality_lab.hpp"
#include "integrator.hpp"

namespace boltz1d {

struct LemmaReport {
  std::string lemma;
  TrialSummary summary;
  double seconds = 0.0;
  nlohmann::json extra = nlohmann::json::object();
  bool holds() const { return summary.holds(); }
};

// K(m, C) < 1 and alpha < 1 on a 32x32 log grid of (m, C) in [0.1, 10]^2,
// then phi^{-1}(phi(h)) = h to 1e-12 relative on 1024 log-spaced h per mass
inline TrialSummary constants_lemma_check(nlohmann::json* extra = nullptr) {
  TrialSummary s{"constants"};
  double worst_K = 0.0, worst_alpha = 0.0, worst_inv = 0.0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      const double m = 0.1 * std::pow(100.0, i / 31.0), C = 0.1 * std::pow(100.0, j / 31.0);
      const auto k = small_entropy_constants(m, C);
      worst_K = std::max(worst_K, k.K);
      worst_alpha = std::max(worst_alpha, k.alpha);
      s.add(VerifyOutcome{k.K, 1.0, k.K < 1.0 && k.eps > 0.0});
      s.add(VerifyOutcome{k.alpha, 1.0, k.alpha < 1.0});
    }
  for (double m : {0.1, 1.0, 10.0})
    for (int i = 0; i < 1024; ++i) {
      const double h = 1e-10 * std::pow(1e12, i / 1023.0);
      const double back = entropy_phi_inverse(entropy_phi(h, m), m);
      const double rel = std::abs(back - h) / h;
      worst_inv = std::max(worst_inv, rel);
      s.add(VerifyOutcome{rel, 1e-12, rel <= 1e-12});
    }
  if (extra) *extra = {{"max_K", worst_K}, {"max_alpha", worst_alpha}, {"max_inverse_rel_error", worst_inv}};
  return s;
}

struct PicardStrangReport {
  double horizon = 0.0;
  double dt = 0.0;
  double l1_diff = 0.0;
  double allowed = 0.0;
  int iterations = 0;
  double contraction = 0.0;
  bool holds = false;
};

// small-mass bump on a torus, horizon from the contraction budget, L1 distance at every step
inline PicardStrangReport picard_strang_check(double tol = 1e-10, int steps = 5) {
  PicardStrangReport rep;
  const PhaseGrid g{DomainKind::torus, 1.0, 8, 5.0, 8};
  const auto kernel = canonical_kernel(1.0, 1.0, 0.5);
  const CollisionOperator op(kernel, g, SphereQuadrature(8, 6));
  const auto prof = unit_maxwellian(g, {0.3, 0, 0}, 1.0);
  DistributionState f(g);
  for (int ix = 0; ix < g.Nx; ++ix) {
    const double rho = 0.2 * (1.0 + 0.5 * std::cos(2.0 * pi * g.x(ix)));
    for (int iv = 0; iv < g.nv3(); ++iv) f.at(ix, iv) = rho * prof[iv];
  }
  const double X = x_norm(f).value;
  rep.horizon = picard_horizon(kernel, X);
  rep.dt = rep.horizon / steps;
  const auto pr = picard_solve(f, steps * rep.dt, op, rep.dt, tol, 50);
  rep.iterations = pr.iterations;
  rep.contraction = pr.contraction;
  IntegratorConfig ic;
  ic.dt = rep.dt;
  ic.t_end = steps * rep.dt;
  const Integrator integ(op, ic);
  DistributionState s = f;
  const double l1 = l1_norm(f);
  for (int n = 1; n <= steps; ++n) {
    s = integ.step(s);
    double d = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) d += std::abs(s.values[i] - pr.states[n].values[i]);
    rep.l1_diff = std::max(rep.l1_diff, d * g.dx() * g.dv3());
  }
  rep.allowed = std::max(5.0 * rep.dt * rep.dt, tol) * l1;
  rep.holds = pr.converged && rep.l1_diff <= rep.allowed;
  return rep;
}

inline const std::vector<std::string>& lemma_names() {
  static const std::vector<std::string> names{"angular-averaging", "bilinear", "torus-gain", "moment-w11",
                                              "dispersion", "rho-l2", "constants", "gronwall-bony",
                                              "gronwall-small-entropy", "picard-strang"};
  return names;
}

inline long default_trials(const std::string& lemma) {
  if (lemma == "angular-averaging" || lemma == "bilinear") return 1000;
  if (lemma == "moment-w11") return 50;
  return 100;
}

// runs one lemma sweep; trials <= 0 picks the default count
inline LemmaReport verify_lemma(const std::string& lemma, long trials, unsigned long long seed) {
  if (trials <= 0) trials = default_trials(lemma);
  const auto t0 = std::chrono::steady_clock::now();
  LemmaReport r;
  r.lemma = lemma;
  if (lemma == "angular-averaging") {
    r.summary = run_gain_trials(trials, seed, {}, true, false).angular;
  } else if (lemma == "bilinear") {
    r.summary = run_gain_trials(trials, seed, {}, false, true).bilinear;
  } else if (lemma == "torus-gain") {
    r.summary = run_torus_gain_trials(trials, seed);
  } else if (lemma == "moment-w11") {
    r.summary = run_moment_trials(trials, seed);
  } else if (lemma == "dispersion") {
    r.summary = run_dispersion_trials(trials, seed);
  } else if (lemma == "rho-l2") {
    r.summary = run_rho_l2_trials(trials, seed);
  } else if (lemma == "constants") {
    r.summary = constants_lemma_check(&r.extra);
  } else if (lemma == "gronwall-bony" || lemma == "gronwall-small-entropy") {
    const auto o = run_oracle_trials(lemma == "gronwall-bony" ? GrowthMode::bony : GrowthMode::small_entropy, trials, seed);
    r.summary = o.bound;
    r.extra = {{"not_converged", o.not_converged}, {"max_iterations", o.max_iterations}};
  } else if (lemma == "picard-strang") {
    const auto p = picard_strang_check();
    r.summary.name = "picard_strang";
    r.summary.add(VerifyOutcome{p.l1_diff, p.allowed, p.holds});
    r.extra = {{"horizon", p.horizon}, {"dt", p.dt}, {"iterations", p.iterations}, {"contraction", p.contraction}};
  } else {
    throw Error("unknown lemma '" + lemma + "'");
  }
  r.summary.seed = seed;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// "all" shares the gain evaluations between the angular and bilinear sweeps
inline std::vector<LemmaReport> verify_all(long trials, unsigned long long seed) {
  std::vector<LemmaReport> out;
  {
    const auto t0 = std::chrono::steady_clock::now();
    const long n = trials > 0 ? trials : default_trials("angular-averaging");
    const auto g = run_gain_trials(n, seed);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(LemmaReport{"angular-averaging", g.angular, sec});
    out.push_back(LemmaReport{"bilinear", g.bilinear, 0.0});
  }
  for (const auto& name : lemma_names()) {
    if (name == "angular-averaging" || name == "bilinear") continue;
    out.push_back(verify_lemma(name, trials, seed));
  }
  return out;
}

inline nlohmann::json to_json(const LemmaReport& r) {
  const auto& s = r.summary;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json j{{"lemma", r.lemma},   {"holds", r.holds()},          {"trials", s.trials},
                   {"failures", s.failures}, {"lhs", num(s.worst_lhs)}, {"rhs", num(s.worst_rhs)},
                   {"margin", num(s.worst_margin)}, {"seed", s.seed}, {"seconds", r.seconds}};
  if (!r.extra.empty()) j["extra"] = r.extra;
  return j;
}

}  // namespace boltz1d
