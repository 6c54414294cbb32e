// one line per acceptance criterion; exit status 0 only if every line passes
#include <boltz1d/boltz1d.hpp>

#include <chrono>
#include <cstdio>
#include <string>

using namespace boltz1d;

namespace {

int failed = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failed;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const RunCheck* find(const ExperimentResult& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool check_ok(const ExperimentResult& r, const std::string& name) {
  const auto* c = find(r, name);
  return c && c->holds && r.trajectory.complete;
}

std::string check_detail(const ExperimentResult& r, const std::string& name) {
  const auto* c = find(r, name);
  if (!c) return name + " missing";
  return fmt("%s lhs=%.4g rhs=%.4g at t=%g", name.c_str(), c->lhs, c->rhs, c->t);
}

double l1(const CollisionField& q) {
  double s = 0.0;
  for (double v : q.values) s += std::abs(v);
  return s;
}

void equilibrium_residual() {
  const auto k = canonical_kernel(1.0, 1.0, 0.5);
  std::string detail;
  bool ok = true;
  double prev = 1e300, at10 = 0.0, slowest = 0.0;
  for (int nv : {8, 10, 12}) {
    const PhaseGrid g{DomainKind::torus, 1.0, 2, 6.0, nv};
    const auto t0 = std::chrono::steady_clock::now();
    const CollisionOperator op(k, g, SphereQuadrature(8, 6));
    const auto M = maxwellian_state({1.0, {0, 0, 0}, 1.0}, g);
    const double qm = l1(op.loss(M, M));
    const double ratio = l1(op.collide(M)) / qm;  // the operator the integrator steps with
    const double raw = l1(op.raw_collision(M)) / qm;
    slowest = std::max(slowest, seconds_since(t0));
    ok = ok && ratio < prev;
    prev = ratio;
    if (nv == 10) at10 = ratio;
    detail += fmt("Nv=%d %.3g (raw %.3g) ", nv, ratio, raw);
  }
  ok = ok && at10 <= 5e-2 && slowest <= 60.0;
  report(1, "equilibrium residual", ok, detail + fmt("slowest %.1fs", slowest));
}

ExperimentResult run_preset(const std::string& name) {
  auto r = run_experiment(preset(name));
  if (!r.trajectory.complete) std::printf("  %s stopped: %s\n", name.c_str(), r.trajectory.error.c_str());
  return r;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  equilibrium_residual();

  const auto large = run_preset("large-data-torus");
  {
    const bool ok = check_ok(large, "mass_conservation") && check_ok(large, "momentum_conservation") &&
                    check_ok(large, "energy_conservation") && large.wall_seconds <= 1200.0;
    report(2, "conservation", ok,
           check_detail(large, "mass_conservation") + "; " + check_detail(large, "momentum_conservation") + "; " +
               check_detail(large, "energy_conservation") + fmt("; %.0fs", large.wall_seconds));
  }

  const auto near = run_preset("near-maxwellian-torus");
  report(3, "entropy non-increasing", check_ok(near, "entropy_nonincreasing") && check_ok(near, "no_positivity_clipping"),
         check_detail(near, "entropy_nonincreasing") + fmt("; clip events %ld", near.trajectory.clip_total));

  report(4, "bony inequality", check_ok(large, "bony_inequality"), check_detail(large, "bony_inequality"));

  const auto line = run_preset("line-dissipation");
  report(5, "x-norm growth bound", check_ok(large, "x_norm_bony_bound") && check_ok(line, "x_norm_bony_bound"),
         "torus " + check_detail(large, "x_norm_bony_bound") + "; line " + check_detail(line, "x_norm_bony_bound"));
  report(6, "line dissipation", check_ok(line, "x_norm_decay") && check_ok(line, "collision_rate_cauchy_tail"),
         check_detail(line, "x_norm_decay") + "; " + check_detail(line, "collision_rate_cauchy_tail"));

  const unsigned long long seed = 20240611ULL;
  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = run_gain_trials(1000, seed);
    const double sec = seconds_since(t0);
    report(7, "angular averaging", g.angular.holds() && g.angular.trials == 1000 && sec <= 600.0,
           fmt("%ld/%ld failures, worst margin %.3g, %.0fs with the bilinear sweep", g.angular.failures, g.angular.trials,
               g.angular.worst_margin, sec));
    report(8, "bilinear X bound", g.bilinear.holds() && g.bilinear.trials == 1000,
           fmt("%ld/%ld failures, worst margin %.3g", g.bilinear.failures, g.bilinear.trials, g.bilinear.worst_margin));
  }
  {
    const auto b = run_oracle_trials(GrowthMode::bony, 100, seed);
    const auto s = run_oracle_trials(GrowthMode::small_entropy, 100, seed);
    const bool ok = b.bound.holds() && s.bound.holds() && b.not_converged == 0 && s.not_converged == 0 &&
                    b.max_iterations <= 200 && s.max_iterations <= 200 && b.bound.trials == 100 && s.bound.trials == 100;
    report(9, "gronwall oracles", ok,
           fmt("bony %ld/%ld failures (max %d sweeps), small-entropy %ld/%ld failures (max %d sweeps)", b.bound.failures,
               b.bound.trials, b.max_iterations, s.bound.failures, s.bound.trials, s.max_iterations));
  }
  {
    nlohmann::json extra;
    const auto c = constants_lemma_check(&extra);
    report(10, "constants lemma", c.holds(),
           fmt("max K 1-%.3g, max alpha 1-%.3g, max inverse error %.2g", 1.0 - extra["max_K"].get<double>(),
               1.0 - extra["max_alpha"].get<double>(), extra["max_inverse_rel_error"].get<double>()));
  }
  {
    const auto d = run_dispersion_trials(100, seed);
    report(11, "dispersive estimate", d.holds() && d.trials == 400,
           fmt("%ld/%ld failures, worst margin %.3g", d.failures, d.trials, d.worst_margin));
  }
  {
    const auto p = picard_strang_check();
    report(12, "picard vs strang", p.holds,
           fmt("L1 gap %.3g allowed %.3g (horizon %.3g, %d iterations)", p.l1_diff, p.allowed, p.horizon, p.iterations));
  }
  std::printf("%d of 12 criteria failed, %.0fs total\n", failed, seconds_since(start));
  return failed == 0 ? 0 : 1;
}
