// boltz1d command line: run, check-kernel, verify, oracle
#include <CLI11.hpp>
#include <json.hpp>

#include <boltz1d/boltz1d.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace boltz1d;
using nlohmann::json;

namespace {

int cmd_run(const std::string& path, const std::string& out_override, bool quiet) {
  auto cfg = load_config(path);
  if (!out_override.empty()) cfg.output.directory = out_override;
  for (const auto& w : cfg.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  auto progress = [&](const DiagnosticsRecord& r) {
    if (!quiet) std::fprintf(stderr, "t=%-8.4g mass=%.12g H=%.8g X=%.6g\n", r.t, r.mass, r.H, r.X);
  };
  ExperimentResult res;
  try {
    res = run_experiment(cfg, progress);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  const auto files = emit_outputs(res);
  for (const auto& w : res.warnings)
    if (std::find(cfg.warnings.begin(), cfg.warnings.end(), w) == cfg.warnings.end()) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!res.trajectory.error.empty()) std::fprintf(stderr, "error: %s\n", res.trajectory.error.c_str());
  for (const auto& c : res.checks)
    std::printf("%-28s %s  lhs=%.6g rhs=%.6g t=%g\n", c.name.c_str(), c.holds ? "PASS" : "FAIL", c.lhs, c.rhs, c.t);
  std::printf("wrote %zu files to %s (%.1f s)\n", files.size(), cfg.output.directory.c_str(), res.wall_seconds);
  return res.ok() ? 0 : 1;
}

int cmd_check_kernel(const std::string& path) {
  const auto cfg = load_config(path);
  const auto k = cfg.kernel.build(cfg.base_dir);
  const auto rep = validate_hypotheses(k);
  json j{{"kernel", k.description},
         {"H1", rep.h1_holds},
         {"H2", rep.h2_holds},
         {"delta", std::isfinite(k.delta) ? json(k.delta) : json(nullptr)},
         {"estimated_delta", rep.estimated_delta ? json(*rep.estimated_delta) : json(nullptr)},
         {"sup_bound", k.sup_bound},
         {"envelope_l1", k.envelope_l1},
         {"sample", rep.sample_description},
         {"notes", rep.notes}};
  if (std::isfinite(rep.worst_violation.margin))
    j["worst_violation"] = {{"r", rep.worst_violation.r}, {"mu", rep.worst_violation.mu}, {"margin", rep.worst_violation.margin}};
  std::cout << j.dump(2) << "\n";
  return rep.h1_holds && rep.h2_holds ? 0 : 1;
}

int cmd_verify(const std::string& lemma, long trials, unsigned long long seed, const std::string& report) {
  std::vector<LemmaReport> reps;
  if (lemma == "all") reps = verify_all(trials, seed);
  else reps.push_back(verify_lemma(lemma, trials, seed));
  json j = json::array();
  bool ok = true;
  for (const auto& r : reps) {
    j.push_back(to_json(r));
    ok = ok && r.holds();
    std::fprintf(stderr, "%-24s %s  trials=%ld failures=%ld margin=%.4g (%.1f s)\n", r.lemma.c_str(), r.holds() ? "PASS" : "FAIL",
                 r.summary.trials, r.summary.failures, r.summary.worst_margin, r.seconds);
  }
  if (report.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream os(report);
    if (!os) throw Error("cannot write " + report);
    os << j.dump(2) << "\n";
  }
  return ok ? 0 : 1;
}

std::vector<double> uniform_grid(double T, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = T * i / (n - 1);
  return t;
}

// {"mode": "bony"|"small-entropy", "t_end": T, "n": 512, ...} or an explicit "t" array;
// bony wants c, phi0 and "a" (array on t, or a constant); small-entropy wants c0, c1, c2, alpha, eps, m
GrowthBoundSpec read_growth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open growth spec " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(std::string("growth spec: ") + e.what());
  }
  GrowthBoundSpec s;
  const std::string mode = j.value("mode", "bony");
  if (mode == "bony") s.mode = GrowthMode::bony;
  else if (mode == "small-entropy") s.mode = GrowthMode::small_entropy;
  else throw Error("growth spec: mode must be bony or small-entropy");
  if (j.contains("t")) s.t = j["t"].get<std::vector<double>>();
  else s.t = uniform_grid(j.value("t_end", 1.0), j.value("n", 512));
  if (s.mode == GrowthMode::bony) {
    s.c = j.value("c", 1.0);
    s.phi0 = j.value("phi0", 0.0);
    if (j.contains("a") && j["a"].is_array()) s.a = j["a"].get<std::vector<double>>();
    else s.a.assign(s.t.size(), j.value("a", 0.0));
  } else {
    s.c0 = j.value("c0", 1.0);
    s.c1 = j.value("c1", 1.0);
    s.c2 = j.value("c2", 1.0);
    s.alpha = j.value("alpha", 0.5);
    s.eps = j.value("eps", 1.0);
    s.m = j.value("m", 1.0);
  }
  s.validate();
  return s;
}

int cmd_oracle(const std::string& path, int max_iter, double tol) {
  const auto s = read_growth_spec(path);
  const auto o = maximal_solution_oracle(s, max_iter, tol);
  bool holds = o.converged && !o.diverged;
  json rows = json::array();
  double worst = -std::numeric_limits<double>::infinity();
  const std::size_t stride = std::max<std::size_t>(1, s.t.size() / 32);
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    double log_bound;
    if (s.mode == GrowthMode::bony)
      log_bound = bony_bound_log2(s.c, std::span(s.t.data(), k + 1), std::span(s.a.data(), k + 1), s.phi0) * std::log(2.0);
    else
      log_bound = small_entropy_bound_log(s, s.t[k]);
    const double gap = std::log(std::max(o.phi[k], 1e-300)) - log_bound;
    worst = std::max(worst, gap);
    if (gap > 1e-12) holds = false;
    if (k % stride == 0 || k + 1 == s.t.size())
      rows.push_back({{"t", s.t[k]}, {"oracle", o.phi[k]}, {"log_bound", log_bound}});
  }
  json j{{"mode", s.mode == GrowthMode::bony ? "bony" : "small-entropy"},
         {"iterations", o.iterations},
         {"converged", o.converged},
         {"diverged", o.diverged},
         {"worst_log_gap", worst},
         {"holds", holds},
         {"samples", rows}};
  if (s.mode == GrowthMode::small_entropy) {
    const auto ch = small_entropy_chain(s);
    j["constants"] = {{"p", ch.p}, {"K", ch.K}, {"C", ch.C}};
  }
  std::cout << j.dump(2) << "\n";
  return holds ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boltz1d: one-dimensional Boltzmann solver and inequality checks"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a configured experiment and write its outputs");
  std::string run_cfg, run_out;
  bool quiet = false;
  run->add_option("config", run_cfg, "INI config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", run_out, "override output.directory");
  run->add_flag("-q,--quiet", quiet, "no progress lines");

  auto* ck = app.add_subcommand("check-kernel", "check the kernel of a config against the cutoff hypotheses");
  std::string ck_cfg;
  ck->add_option("config", ck_cfg, "INI config file")->required()->check(CLI::ExistingFile);

  auto* ver = app.add_subcommand("verify", "randomized sweeps of the functional inequalities");
  std::string lemma;
  long trials = 0;
  unsigned long long seed = 20240611ULL;
  std::string report;
  std::vector<std::string> choices = lemma_names();
  choices.push_back("all");
  ver->add_option("lemma", lemma, "lemma name or all")->required()->check(CLI::IsMember(choices));
  ver->add_option("--trials", trials, "trial count (default per lemma)");
  ver->add_option("--seed", seed, "RNG seed");
  ver->add_option("--report", report, "write the JSON report here instead of stdout");

  auto* orc = app.add_subcommand("oracle", "maximal solution of a Gronwall-type inequality against its closed-form bound");
  std::string spec;
  int max_iter = 200;
  double tol = 1e-8;
  orc->add_option("growth-spec", spec, "JSON growth spec")->required()->check(CLI::ExistingFile);
  orc->add_option("--max-iter", max_iter, "sweep limit");
  orc->add_option("--tol", tol, "relative change for convergence");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_cfg, run_out, quiet);
    if (*ck) return cmd_check_kernel(ck_cfg);
    if (*ver) return cmd_verify(lemma, trials, seed, report);
    if (*orc) return cmd_oracle(spec, max_iter, tol);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
