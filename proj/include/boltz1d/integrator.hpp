#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "collision.hpp"
#include "diagnostics.hpp"
#include "state.hpp"
#include "transport.hpp"

namespace boltz1d {

enum class Scheme { strang, lie, picard };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::strang: return "strang";
    case Scheme::lie: return "lie";
    default: return "picard";
  }
}

struct IntegratorConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::strang;
  double picard_tol = 1e-10;
  int picard_max_iter = 50;
  double t_end = 1.0;
  int snapshot_stride = 10;
  double dt_min = 1e-8;
  double guard = 0.5;  // bound on dt * ||Phi||_inf * max rho

  void validate() const {
    if (!(dt > 0.0)) throw Error("integrator.dt must be positive");
    if (!(t_end >= 0.0)) throw Error("integrator.t_end must be nonnegative");
    if (snapshot_stride < 1) throw Error("integrator.snapshot_stride must be at least 1");
    if (!(picard_tol > 0.0)) throw Error("integrator.picard_tol must be positive");
    if (picard_max_iter < 1) throw Error("integrator.picard_max_iter must be at least 1");
  }
};

struct StepStats {
  int substeps = 0;
  int halvings = 0;
  long clip_events = 0;
  double leakage = 0.0;  // mass rate lost to outgoing velocities outside the box, times the substep length
  double projection_magnitude = 0.0;
};

struct Trajectory {
  std::vector<DiagnosticsRecord> records;
  std::vector<DistributionState> snapshots;
  // per-step samples behind the running integrals
  std::vector<double> step_t, step_A, step_DB, step_ell, step_X, step_H, step_L;
  long clip_total = 0;
  int halvings = 0;
  double projection_max = 0.0;
  double leakage_total = 0.0;
  bool complete = false;
  std::string error;

  // trapezoid integral of a per-step sample up to the step at time t
  double integral(const std::vector<double>& y, double t) const {
    std::size_t n = 0;
    while (n < step_t.size() && step_t[n] <= t + 1e-12) ++n;
    return trapezoid(std::span(step_t.data(), n), std::span(y.data(), n));
  }
};

namespace detail {

// restore the per-cell moments of `target` after clipping, correcting with weight f so zeros stay zero
inline void reproject_moments(DistributionState& f, const std::vector<std::array<double, 5>>& target) {
  const auto& g = f.grid;
  for (int pass = 0; pass < 2; ++pass) {
    CollisionField c(g);
    c.values = f.values;
    compute_residuals(c);
    for (int ix = 0; ix < g.Nx; ++ix) {
      std::array<double, 5> res;
      for (int k = 0; k < 5; ++k) res[k] = c.residuals[ix][k] - target[ix][k];
      if (std::all_of(res.begin(), res.end(), [](double r) { return r == 0.0; })) continue;
      try {
        const auto lam = projection_coefficients(c, res, f.row(ix));
        apply_correction(c, ix, lam, f.row(ix));
      } catch (const Error&) {
        continue;  // too few positive nodes left in this cell to carry five moments
      }
    }
    f.values = c.values;
  }
}

inline std::vector<std::array<double, 5>> cell_moments(const DistributionState& f) {
  CollisionField c(f.grid);
  c.values = f.values;
  compute_residuals(c);
  return c.residuals;
}

}  // namespace detail

class Integrator {
 public:
  Integrator(const CollisionOperator& op, IntegratorConfig cfg) : op_(op), cfg_(cfg) {
    cfg_.validate();
    phi_max_ = op_.max_cross_section();
  }

  const IntegratorConfig& config() const { return cfg_; }

  // explicit Euler on the projected Q over [0, h], split into power-of-two substeps by the positivity guard
  DistributionState collision_substep(const DistributionState& f, double h, StepStats& st) const {
    DistributionState out = f;
    if (phi_max_ == 0.0) return out;
    const double rho = linf_l1(f);
    int n = 1;
    while (h / n * phi_max_ * rho > cfg_.guard) {
      n *= 2;
      ++st.halvings;
      if (h / n < cfg_.dt_min) throw Error("positivity guard pushed the collision step below dt_min");
    }
    const double hs = h / n;
    for (int k = 0; k < n; ++k) {
      const CollisionField q = op_.collide(out);
      st.projection_magnitude = std::max(st.projection_magnitude, q.projection_magnitude);
      st.leakage += hs * q.leakage;
      for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += hs * q.values[i];
      long clipped = 0;
      for (double v : out.values) clipped += v < 0.0;
      if (clipped) {
        const auto target = detail::cell_moments(out);
        for (double& v : out.values) v = std::max(v, 0.0);
        detail::reproject_moments(out, target);
        st.clip_events += clipped;
      }
      ++st.substeps;
    }
    return out;
  }

  DistributionState step(const DistributionState& f, StepStats* stats = nullptr) const {
    StepStats local;
    StepStats& st = stats ? *stats : local;
    const double dt = cfg_.dt;
    DistributionState out;
    if (cfg_.scheme == Scheme::lie) {
      out = shift(collision_substep(f, dt, st), dt);
    } else {
      out = shift(collision_substep(shift(f, 0.5 * dt), dt, st), 0.5 * dt);
    }
    out.time = f.time + dt;
    return out;
  }

  // advances to t_end; a record every snapshot_stride steps and at the end
  Trajectory run(DistributionState f, const DiagnosticsOptions& diag, bool keep_snapshots = false,
                 const std::function<void(const DiagnosticsRecord&)>& on_record = {}) const {
    Trajectory tr;
    const long n_steps = std::lround(cfg_.t_end / cfg_.dt);
    DiagnosticsOptions cheap = diag;
    cheap.entropy_production = false;
    auto sample = [&](const DistributionState& s, const DiagnosticsRecord& r) {
      tr.step_t.push_back(s.time);
      tr.step_A.push_back(r.A);
      tr.step_DB.push_back(r.D_B);
      tr.step_ell.push_back(r.ell);
      tr.step_X.push_back(r.X);
      tr.step_H.push_back(r.H);
      tr.step_L.push_back(r.L);
    };
    auto record = [&](const DistributionState& s) {
      DiagnosticsRecord r = evaluate(s, op_, diag);
      r.clip_count = tr.clip_total;
      r.leak_v = tr.leakage_total;
      sample(s, r);
      tr.records.push_back(r);
      if (keep_snapshots) tr.snapshots.push_back(s);
      if (on_record) on_record(r);
    };
    try {
      record(f);
      for (long n = 1; n <= n_steps; ++n) {
        StepStats st;
        f = step(f, &st);
        f.time = n * cfg_.dt;
        tr.clip_total += st.clip_events;
        tr.halvings += st.halvings;
        tr.leakage_total += st.leakage;
        tr.projection_max = std::max(tr.projection_max, st.projection_magnitude);
        if (n % cfg_.snapshot_stride == 0 || n == n_steps) {
          record(f);
        } else {
          DiagnosticsRecord r = evaluate(f, op_, cheap);
          sample(f, r);
        }
      }
      tr.complete = true;
    } catch (const Error& e) {
      tr.error = e.what();
    }
    return tr;
  }

 private:
  const CollisionOperator& op_;
  IntegratorConfig cfg_;
  double phi_max_ = 0.0;
};

// ---------------------------------------------------------------- Picard

struct PicardResult {
  std::vector<DistributionState> states;  // on t_n = n dt, n = 0..N
  int iterations = 0;
  double contraction = 0.0;  // largest ratio of successive iterate distances
  double last_distance = 0.0;
  bool converged = false;
};

// horizon from the bilinear contraction budget: 1 / (8 * 8 pi ||phi||_L1 * 2 ||f_in||_X)
inline double picard_horizon(const CollisionKernel& k, double x_norm_in) {
  const double cb = 8.0 * pi * k.envelope_l1;
  if (cb == 0.0 || x_norm_in == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (8.0 * cb * 2.0 * x_norm_in);
}

// Fixed point of f(t_n) = S_{t_n} f_in + sum_m w_m S_{t_n - t_m} Q(f(t_m)) with trapezoid weights.
// Transport is composed from half-step shifts so it matches the split scheme exactly.
inline PicardResult picard_solve(const DistributionState& f_in, double T, const CollisionOperator& op, double dt,
                                 double tol, int max_iter, int n_q = 32) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw Error("picard: need dt > 0 and T >= 0");
  const long N = std::lround(T / dt);
  const double x_in = x_norm(f_in, default_q_max(f_in.grid), n_q).value;
  auto H2 = [&](const DistributionState& s) { return shift(shift(s, 0.5 * dt), 0.5 * dt); };
  PicardResult res;
  std::vector<DistributionState> free(N + 1);
  free[0] = f_in;
  for (long n = 1; n <= N; ++n) free[n] = H2(free[n - 1]);
  for (long n = 0; n <= N; ++n) free[n].time = n * dt;
  res.states = free;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<CollisionField> Q(N + 1);
    for (long n = 0; n <= N; ++n) Q[n] = op.collide(res.states[n]);
    std::vector<DistributionState> next(N + 1);
    DistributionState P(f_in.grid), R(f_in.grid);
    double dist = 0.0;
    for (long n = 0; n <= N; ++n) {
      const auto qn = as_state(Q[n]);
      if (n == 0) {
        R = qn;
        for (std::size_t i = 0; i < P.values.size(); ++i) P.values[i] = dt * qn.values[i];
        next[0] = f_in;
      } else {
        P = H2(P);
        R = H2(R);
        for (std::size_t i = 0; i < P.values.size(); ++i) P.values[i] += dt * qn.values[i];
        next[n] = free[n];
        for (std::size_t i = 0; i < P.values.size(); ++i)
          next[n].values[i] += P.values[i] - 0.5 * dt * (R.values[i] + qn.values[i]);
      }
      next[n].time = n * dt;
      DistributionState d = next[n];
      for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= res.states[n].values[i];
      dist = std::max(dist, x_norm(d, default_q_max(d.grid), n_q).value);
    }
    res.states = std::move(next);
    res.iterations = it;
    res.last_distance = dist;
    if (it > 1 && prev > 0.0) res.contraction = std::max(res.contraction, dist / prev);
    if (dist <= tol * std::max(x_in, 1e-300) || dist == 0.0) {
      res.converged = true;
      break;
    }
    if (it > 2 && prev > 0.0 && dist >= prev) throw Error("picard iteration is not contracting; shorten the horizon");
    prev = dist;
  }
  return res;
}

}  // namespace boltz1d
