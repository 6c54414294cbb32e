#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "collision.hpp"
#include "diagnostics.hpp"
#include "kernel.hpp"
#include "quadrature.hpp"
#include "state.hpp"
#include "transport.hpp"

namespace boltz1d {

// ---------------------------------------------------------------- small-entropy constants

struct SmallEntropyConstants {
  double K = 0.0;
  double eps = 0.0;
  double alpha = 0.0;
  double threshold = 0.0;  // admissible H(f|M): 1 / (4C + 2C^2 m)
};

// phi(h) = h + sqrt(m h / 2) and its inverse
inline double entropy_phi(double h, double m) { return h + std::sqrt(0.5 * m * h); }

inline double entropy_phi_inverse(double x, double m) {
  const double a = x + 0.25 * m;
  // a - sqrt(a^2 - x^2) written without cancellation
  return x * x / (a + std::sqrt((a - x) * (a + x)));
}

inline SmallEntropyConstants small_entropy_constants(double m, double C) {
  if (!(m > 0.0) || !(C > 0.0)) throw Error("small_entropy_constants: m and C must be positive");
  SmallEntropyConstants k;
  k.threshold = 1.0 / (4.0 * C + 2.0 * C * C * m);
  k.K = 2.0 * C * entropy_phi(k.threshold, m);
  k.eps = (1.0 - k.K) / (4.0 * C * m);
  // the eps m term enters the gain bound with the factor 2C in front of it
  k.alpha = k.K + 2.0 * C * k.eps * m;
  return k;
}

// ---------------------------------------------------------------- growth bounds

enum class GrowthMode { bony, small_entropy };

struct GrowthBoundSpec {
  GrowthMode mode = GrowthMode::bony;
  // bony: phi(t) <= phi(t0) + int_{t0}^t min{c phi^2, (1 + 1/(t-s)) a(s)} ds
  double c = 1.0;
  double phi0 = 0.0;
  std::vector<double> t;  // uniform grid starting at 0
  std::vector<double> a;  // samples of a on t
  // small entropy: phi(t) <= c0 + int_0^t min{c1 phi^2, (alpha/(t-s) + c2) psi(phi)} ds,
  // psi(phi) = max(m/eps, phi / (log(phi/m) + eps))
  double c0 = 1.0, c1 = 1.0, c2 = 1.0, alpha = 0.5, eps = 1.0, m = 1.0;

  void validate() const {
    if (t.size() < 2) throw Error("growth spec needs at least two time samples");
    if (t.front() != 0.0) throw Error("growth spec time grid must start at 0");
    if (mode == GrowthMode::bony) {
      if (!(c > 0.0)) throw Error("growth spec: c must be positive");
      if (!(phi0 >= 0.0)) throw Error("growth spec: phi0 must be nonnegative");
      if (a.size() != t.size()) throw Error("growth spec: a must be sampled on the time grid");
      for (double v : a)
        if (!(v >= 0.0)) throw Error("growth spec: a must be nonnegative");
    } else {
      if (!(alpha > 0.0) || !(alpha < 1.0)) throw Error("growth spec: alpha must lie in (0, 1)");
      if (!(m > 0.0) || !(eps > 0.0)) throw Error("growth spec: m and eps must be positive");
      if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw Error("growth spec: c1 and c2 must be nonnegative");
      if (!(c0 >= m)) throw Error("growth spec: the lemma assumes phi >= m, so c0 must be at least m");
    }
  }
};

inline double entropy_psi(double phi, double m, double eps) {
  const double l = phi > m ? std::log(phi / m) : 0.0;
  return std::max(m / eps, phi / (l + eps));
}

// log2 of 2^{1 + 16 c int_0^t a} (phi0 + 1/(8c)); int a by the trapezoid rule on the sample
inline double bony_bound_log2(double c, std::span<const double> t, std::span<const double> a, double phi0) {
  if (!(c > 0.0)) throw Error("bony_bound: c must be positive");
  const double ia = trapezoid(t, a);
  return 1.0 + 16.0 * c * ia + std::log2(phi0 + 1.0 / (8.0 * c));
}

// a(t) = C2 A(t) turns the collision rate into the Bony growth weight: 4 pi / delta times
// max(1 / (L R0^2), 1 / R0^3) on a torus of length L, 4 pi / (delta R0^3) on the line
inline double bony_rate_constant(const CollisionKernel& k, const PhaseGrid& g) {
  if (!(k.R0 > 0.0) || !(k.delta > 0.0)) return 0.0;
  const double cube = 1.0 / (k.R0 * k.R0 * k.R0);
  const double m = g.kind == DomainKind::torus ? std::max(1.0 / (g.L * k.R0 * k.R0), cube) : cube;
  return 4.0 * pi / k.delta * m;
}

// c = 8 pi ||phi||_L1 from the bilinear estimate
inline double bony_c(const CollisionKernel& k) { return 8.0 * pi * k.envelope_l1; }

inline double bony_bound(double c, std::span<const double> t, std::span<const double> a, double phi0) {
  return std::exp2(bony_bound_log2(c, t, a, phi0));
}

struct SmallEntropyChain {
  double p = 0.0;
  double K = 0.0;
  double C = 0.0;
};

// Constant chain behind phi(t) <= exp(C sqrt(1+t)). K is the smallest value (binary search in log K)
// with K >= m e, log K >= max(e^2, 2|log m|) and c1 m / log K + alpha log log K / log(K/m) <= (1-alpha)/4;
// the left side of the last condition decreases in K on that range.
inline SmallEntropyChain small_entropy_chain(const GrowthBoundSpec& s) {
  if (!(s.alpha < 1.0)) throw Error("small_entropy_bound: alpha >= 1, the constant blows up");
  SmallEntropyChain ch;
  ch.p = 2.0 * s.alpha / (1.0 - s.alpha);
  const double lm = std::log(s.m);
  const double y_min = std::max({std::exp(2.0), 2.0 * std::abs(lm), lm + 1.0});
  auto ok = [&](double y) { return s.c1 * s.m / y + s.alpha * std::log(y) / (y - lm) <= 0.25 * (1.0 - s.alpha); };
  double Y = y_min;
  if (!ok(Y)) {
    double lo = Y, hi = 2.0 * Y;
    while (!ok(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) throw Error("small_entropy_bound: no admissible K");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? hi : lo) = mid;
    }
    Y = hi;
  }
  ch.K = std::exp(Y);
  const double a1 = 1.0 - s.alpha;
  const double C = std::max({Y + 2.0 * ch.p / std::exp(1.0), std::sqrt(32.0 * s.c2 / a1), std::log(8.0 * s.c0 / a1),
                             2.0 * std::max(0.0, lm - s.eps)});
  ch.C = 1.01 * C;
  return ch;
}

inline double small_entropy_bound(const GrowthBoundSpec& s, double t) {
  return std::exp(small_entropy_chain(s).C * std::sqrt(1.0 + t));
}

inline double small_entropy_bound_log(const GrowthBoundSpec& s, double t) {
  return small_entropy_chain(s).C * std::sqrt(1.0 + t);
}

struct OracleResult {
  std::vector<double> phi;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

// Monotone Gauss-Seidel sweeps for the maximal solution of the equality version.
// Midpoint rule on cells [t_j, t_{j+1}] with phi, a averaged over the cell end points; the
// midpoints never hit the singular node, and the c phi^2 branch caps the kernel near it.
inline OracleResult maximal_solution_oracle(const GrowthBoundSpec& s, int max_iter = 200, double tol = 1e-8) {
  s.validate();
  const int n = int(s.t.size());
  const double h = s.t[1] - s.t[0];
  for (int i = 1; i < n; ++i)
    if (std::abs(s.t[i] - s.t[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h))) throw Error("oracle needs a uniform time grid");
  const bool bony = s.mode == GrowthMode::bony;
  OracleResult r;
  r.phi.assign(n, bony ? s.phi0 : s.c0);
  for (int it = 1; it <= max_iter; ++it) {
    double change = 0.0;
    for (int i = 1; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < i; ++j) {
        const double pb = 0.5 * (r.phi[j] + r.phi[j + 1]);
        const double w = s.t[i] - 0.5 * (s.t[j] + s.t[j + 1]);
        double second;
        if (bony) second = (1.0 + 1.0 / w) * 0.5 * (s.a[j] + s.a[j + 1]);
        else second = (s.alpha / w + s.c2) * entropy_psi(pb, s.m, s.eps);
        const double first = (bony ? s.c : s.c1) * pb * pb;
        acc += h * std::min(first, second);
      }
      const double nv = (bony ? s.phi0 : s.c0) + acc;
      change = std::max(change, std::abs(nv - r.phi[i]) / std::max(std::abs(nv), 1e-300));
      r.phi[i] = nv;
      if (!std::isfinite(nv) || nv > 1e300) {
        r.diverged = true;
        r.iterations = it;
        return r;
      }
    }
    r.iterations = it;
    if (change < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

// ---------------------------------------------------------------- functional estimates

struct VerifyOutcome {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
  double margin() const { return rhs > 0.0 ? (rhs - lhs) / rhs : (lhs <= 0.0 ? 0.0 : -1.0); }
};

// ||S_q Q+-(g,f)||_X <= 8 pi ||phi||_L1 ||f||_X ||g||_X, over the sampled q and both signs
inline VerifyOutcome verify_bilinear_X(const DistributionState& g, const DistributionState& f, const CollisionOperator& op,
                                       const std::vector<double>& q_samples, double tol = 1e-6, int n_q = 128) {
  require_same_grid(g, f);
  const double qm = default_q_max(f.grid);
  VerifyOutcome o;
  const CollisionField fields[2] = {op.gain(g, f), op.loss(g, f)};
  for (const auto& fld : fields) {
    const auto s = as_state(fld);
    for (double q : q_samples) o.lhs = std::max(o.lhs, x_norm(s, q + qm, n_q, q).value);
  }
  o.rhs = 8.0 * pi * op.kernel().envelope_l1 * x_norm(f, qm, n_q).value * x_norm(g, qm, n_q).value;
  o.holds = o.lhs <= o.rhs * (1.0 + tol);
  return o;
}

namespace detail {

// Cumulative integral of the linear interpolant of a nodal x-profile (cell-centre nodes), the same
// representation the shift uses. Torus profiles are periodic; line profiles vanish beyond the ghost centres.
struct LinearPrimitive {
  const PhaseGrid* grid = nullptr;
  std::vector<double> p;    // node values, including line ghosts at both ends
  std::vector<double> cum;  // integral from the first node to node k
  double z0 = 0.0;          // position of node 0

  void build(const PhaseGrid& g, const double* values) {
    grid = &g;
    const int X = g.Nx;
    const bool torus = g.kind == DomainKind::torus;
    const int n = torus ? X + 1 : X + 2;
    p.assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
      const int src = torus ? k % X : k - 1;
      if (src >= 0 && src < X) p[k] = values[src];
    }
    z0 = torus ? g.x(0) : g.x(0) - g.dx();
    cum.assign(n, 0.0);
    for (int k = 1; k < n; ++k) cum[k] = cum[k - 1] + 0.5 * g.dx() * (p[k - 1] + p[k]);
  }

  double local(double z) const {
    const double h = grid->dx();
    const int n = int(cum.size());
    const double u = (z - z0) / h;
    if (u <= 0.0) return 0.0;
    if (u >= n - 1) return cum.back();
    const int k = int(u);
    const double t = u - k;
    return cum[k] + h * (p[k] * t + 0.5 * (p[k + 1] - p[k]) * t * t);
  }

  double primitive(double z) const {
    if (grid->kind == DomainKind::line) return local(z);
    const double L = grid->length();
    const double w = std::floor((z - z0) / L);
    return w * cum.back() + local(z - w * L);
  }

  double integral(double lo, double hi) const { return primitive(hi) - primitive(lo); }
};

// int F(x - q w, w, v2, v3) dw dv2 dv3 for a nodal field F, read as its piecewise-linear interpolant in
// (x, v1) with zero line ghosts and constant end half-cells in v1 (so q = 0 gives the midpoint sum).
// Midpoint sampling in v1 aliases once q dv exceeds the x resolution, so each v1 cell is sub-sampled.
inline void sheared_v1_integral(const std::vector<double>& F, const PhaseGrid& g, double q, std::vector<double>& out) {
  const int X = g.Nx, Nv = g.Nv, NN = Nv * Nv;
  const double dv = g.dv(), dx = g.dx();
  const bool torus = g.kind == DomainKind::torus;
  const int M = std::clamp(int(std::ceil(8.0 * std::abs(q) * dv / dx)), 1, 1024);
  auto xval = [&](const double* row, double y) {
    double u = (y - g.x(0)) / dx;
    if (torus) u -= X * std::floor(u / X);
    const double fl = std::floor(u);
    const double th = u - fl;
    const long k = long(fl);
    auto at = [&](long i) -> double {
      if (torus) return row[((i % X) + X) % X];
      return i >= 0 && i < X ? row[i] : 0.0;
    };
    return (1.0 - th) * at(k) + th * at(k + 1);
  };
  std::vector<double> r0(X), r1(X), mix(X);
  std::fill(out.begin(), out.end(), 0.0);
  for (int rest = 0; rest < NN; ++rest) {
    for (int c = 0; c < Nv; ++c) {
      for (int x = 0; x < X; ++x) r0[x] = F[std::size_t(x) * g.nv3() + c * NN + rest];
      for (int m = 0; m < M; ++m) {
        const double w = g.v(c) + dv * ((m + 0.5) / M - 0.5);
        // neighbour node on the side of w; end half-cells keep the node value
        const int c1 = w >= g.v(c) ? c + 1 : c - 1;
        const double t = std::abs(w - g.v(c)) / dv;
        if (c1 >= 0 && c1 < Nv) {
          for (int x = 0; x < X; ++x) mix[x] = (1.0 - t) * r0[x] + t * F[std::size_t(x) * g.nv3() + c1 * NN + rest];
        } else {
          mix = r0;
        }
        for (int x = 0; x < X; ++x) out[x] += xval(mix.data(), g.x(x) - q * w);
      }
    }
  }
  const double wgt = g.dv3() / M;
  for (double& o : out) o *= wgt;
}

}  // namespace detail

// int Q+(g,f)(x - q v1, v) dv against the angular-averaging majorant, at every x-cell centre
inline VerifyOutcome verify_angular_averaging(const DistributionState& g, const DistributionState& f,
                                              const CollisionOperator& op, double q, double tol = 1e-6,
                                              const CollisionField* gain = nullptr) {
  require_same_grid(g, f);
  if (!(q > 0.0)) throw Error("angular averaging needs q > 0");
  const auto& gr = f.grid;
  const int N = gr.nv3(), X = gr.Nx;
  const CollisionField qp = gain ? *gain : op.gain(g, f);
  std::vector<double> lhs(X, 0.0), rhs(X, 0.0);
  detail::sheared_v1_integral(qp.values, gr, q, lhs);
  const auto& k = op.kernel();
  std::vector<double> gt(std::size_t(N) * X), ft(std::size_t(N) * X);
  for (int x = 0; x < X; ++x)
    for (int v = 0; v < N; ++v) gt[std::size_t(v) * X + x] = g.at(x, v), ft[std::size_t(v) * X + x] = f.at(x, v);
  std::vector<double> gmass(N, 0.0), fmass(N, 0.0);
  for (int v = 0; v < N; ++v)
    for (int x = 0; x < X; ++x) gmass[v] += std::abs(gt[std::size_t(v) * X + x]), fmass[v] += std::abs(ft[std::size_t(v) * X + x]);
  // the discrete gain is a nodal product in x, so the majorant integrates the interpolant of g f
  detail::LinearPrimitive pp;
  std::vector<double> prod(X);
  for (int a = 0; a < N; ++a) {
    if (fmass[a] == 0.0) continue;
    const Vec3 va = gr.velocity(a);
    for (int b = 0; b < N; ++b) {
      if (gmass[b] == 0.0) continue;
      const Vec3 vb = gr.velocity(b);
      const double r = norm(va - vb);
      const double bt = sup_over_angle(k, r);
      if (bt == 0.0) continue;
      for (int x = 0; x < X; ++x) prod[x] = gt[std::size_t(b) * X + x] * ft[std::size_t(a) * X + x];
      pp.build(gr, prod.data());
      const double lo = 0.5 * q * (va[0] + vb[0] - r), hi = 0.5 * q * (va[0] + vb[0] + r);
      const double w = 4.0 * pi * bt / (q * r);
      for (int x = 0; x < X; ++x) rhs[x] += w * pp.integral(gr.x(x) - hi, gr.x(x) - lo);
    }
  }
  VerifyOutcome o;
  const double scale = gr.dv3() * gr.dv3();
  double worst = -std::numeric_limits<double>::infinity();
  for (int x = 0; x < X; ++x) {
    rhs[x] *= scale;
    const double gap = lhs[x] - rhs[x] * (1.0 + tol);
    if (gap > worst) worst = gap, o.lhs = lhs[x], o.rhs = rhs[x];
    if (gap > 0.0) o.holds = false;
  }
  return o;
}

// ||S_q Q+(f,f)||_X <= 4 pi ||(1 + 1/r) B||_inf (1/L + 1/q) int rho^2 on a torus of length L
inline VerifyOutcome verify_torus_gain_bound(const DistributionState& f, const CollisionOperator& op, double q,
                                             double tol = 1e-6, const CollisionField* gain = nullptr, int n_q = 128) {
  if (f.grid.kind != DomainKind::torus) throw Error("the gain bound is a torus estimate");
  if (!(q > 0.0)) throw Error("torus gain bound needs q > 0");
  const CollisionField qp = gain ? *gain : op.gain_symmetric(f);
  VerifyOutcome o;
  o.lhs = x_norm(as_state(qp), q + default_q_max(f.grid), n_q, q).value;
  o.rhs = 4.0 * pi * op.kernel().sup_bound * (1.0 / f.grid.length() + 1.0 / q) * rho_sq(f);
  o.holds = o.lhs <= o.rhs * (1.0 + tol);
  return o;
}

struct MomentReport {
  double ell = 0.0;
  double C_ell = 1.0;
  VerifyOutcome moment_gain, moment_loss, w11_gain, w11_loss;
  bool holds() const { return moment_gain.holds && moment_loss.holds && w11_gain.holds && w11_loss.holds; }
};

inline double moment_constant(double ell) { return std::max(1.0, std::exp2(ell - 1.0)); }

// weighted L1 and discrete W^{1,1} bilinear bounds for Q+ and Q-
inline MomentReport verify_moment_and_w11_bounds(const DistributionState& g, const DistributionState& f,
                                                 const CollisionOperator& op, double ell, double tol = 1e-6,
                                                 int n_q = 128) {
  require_same_grid(g, f);
  MomentReport rep;
  rep.ell = ell;
  rep.C_ell = moment_constant(ell);
  const double phi_inf = op.max_cross_section();
  const double qm = default_q_max(f.grid);
  const double xf = x_norm(f, qm, n_q).value, xg = x_norm(g, qm, n_q).value;
  const double lf = weighted_norm(f, ell), lg = weighted_norm(g, ell);
  const double wf = discrete_w11_norm(f), wg = discrete_w11_norm(g);
  const auto qp = as_state(op.gain(g, f)), qm_ = as_state(op.loss(g, f));
  auto fill = [&](VerifyOutcome& o, double lhs, double rhs) {
    o.lhs = lhs;
    o.rhs = rhs;
    o.holds = lhs <= rhs * (1.0 + tol);
  };
  const double rm = rep.C_ell * phi_inf * (lg * xf + xg * lf);
  fill(rep.moment_gain, weighted_norm(qp, ell), rm);
  fill(rep.moment_loss, weighted_norm(qm_, ell), rm);
  const double rw = phi_inf * (wg * xf + xg * wf);
  fill(rep.w11_gain, discrete_w11_norm(qp), rw);
  fill(rep.w11_loss, discrete_w11_norm(qm_), rw);
  return rep;
}

// ---------------------------------------------------------------- random data

// sum of a few Maxwellian bumps, each with its own x-profile; torus profiles periodic, line ones Gaussian
inline DistributionState random_bump_state(const PhaseGrid& g, std::mt19937_64& rng, int max_bumps = 3, double temp_floor = 0.0) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int nb = 1 + int(U(rng) * max_bumps) % max_bumps;
  DistributionState s(g);
  const double vs = std::min(1.5, 0.3 * g.Vmax);
  for (int k = 0; k < nb; ++k) {
    const Vec3 u{vs * (2 * U(rng) - 1), vs * (2 * U(rng) - 1), vs * (2 * U(rng) - 1)};
    const double T_lo = std::max(0.3, temp_floor * g.dv() * g.dv());
    const double T = T_lo + std::max(0.9, T_lo) * U(rng);
    const double mass = 0.1 + 1.9 * U(rng);
    const double x0 = g.x_min() + g.length() * (g.kind == DomainKind::torus ? U(rng) : 0.25 + 0.5 * U(rng));
    const double amp = 0.9 * U(rng);
    const double width = std::max(g.dx(), g.length() * (0.08 + 0.2 * U(rng)));  // at least one cell
    const auto prof = unit_maxwellian(g, u, T);
    for (int x = 0; x < g.Nx; ++x) {
      double rho;
      if (g.kind == DomainKind::torus) rho = 1.0 + amp * std::cos(2.0 * pi * (g.x(x) - x0) / g.length());
      else rho = std::exp(-0.5 * std::pow((g.x(x) - x0) / width, 2));
      rho *= mass / g.length();
      for (int v = 0; v < g.nv3(); ++v) s.at(x, v) += rho * prof[v];
    }
  }
  return s;
}

// ---------------------------------------------------------------- trial drivers

struct TrialSummary {
  std::string name;
  long trials = 0;
  long failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_lhs = 0.0, worst_rhs = 0.0;
  unsigned long long seed = 0;
  bool holds() const { return failures == 0; }

  void add(const VerifyOutcome& o) {
    ++trials;
    if (!o.holds) ++failures;
    const double m = o.margin();
    if (m < worst_margin) worst_margin = m, worst_lhs = o.lhs, worst_rhs = o.rhs;
  }
};

// fixed set-up used by the randomized sweeps
struct LabSetup {
  CollisionKernel kernel = canonical_kernel(1.0, 1.0, 0.5, AngularFactor::polynomial({1.0, 0.0, 1.0}));
  PhaseGrid torus{DomainKind::torus, 1.0, 4, 5.0, 8};
  PhaseGrid line{DomainKind::line, 1.0, 4, 5.0, 8};
  int n_polar = 8, n_azimuth = 6;
  double tol = 1e-6;
  double temp_floor = 0.8;  // random bump temperatures start at temp_floor dv^2, so bumps are resolved in v
};

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> U(std::log(lo), std::log(hi));
  return std::exp(U(rng));
}

// angular averaging and the bilinear X bound share the expensive gain evaluations
struct GainTrials {
  TrialSummary angular{"angular_averaging"}, bilinear{"bilinear_X"};
};

inline GainTrials run_gain_trials(long trials, unsigned long long seed, const LabSetup& lab = {}, bool angular = true,
                                  bool bilinear = true) {
  GainTrials out;
  out.angular.seed = out.bilinear.seed = seed;
  std::mt19937_64 rng(seed);
  const CollisionOperator ops[2] = {
      CollisionOperator(lab.kernel, lab.torus, SphereQuadrature(lab.n_polar, lab.n_azimuth)),
      CollisionOperator(lab.kernel, lab.line, SphereQuadrature(lab.n_polar, lab.n_azimuth))};
  for (long i = 0; i < trials; ++i) {
    const auto& op = ops[i % 2];
    const auto g = random_bump_state(op.grid(), rng, 3, lab.temp_floor);
    const auto f = random_bump_state(op.grid(), rng, 3, lab.temp_floor);
    const double q = log_uniform(rng, 0.05, 5.0);
    const CollisionField qp = op.gain(g, f);
    if (angular) out.angular.add(verify_angular_averaging(g, f, op, q, lab.tol, &qp));
    if (bilinear) {
      const double qm = default_q_max(f.grid);
      const auto ql = op.loss(g, f);
      VerifyOutcome o;
      for (const CollisionField* fld : {&qp, &ql})
        for (double qs : {0.0, q}) o.lhs = std::max(o.lhs, x_norm(as_state(*fld), qs + qm, 128, qs).value);
      o.rhs = 8.0 * pi * op.kernel().envelope_l1 * x_norm(f, qm, 128).value * x_norm(g, qm, 128).value;
      o.holds = o.lhs <= o.rhs * (1.0 + lab.tol);
      out.bilinear.add(o);
    }
  }
  return out;
}

inline TrialSummary run_torus_gain_trials(long trials, unsigned long long seed, const LabSetup& lab = {}) {
  TrialSummary s{"torus_gain"};
  s.seed = seed;
  std::mt19937_64 rng(seed);
  const CollisionOperator op(lab.kernel, lab.torus, SphereQuadrature(lab.n_polar, lab.n_azimuth));
  for (long i = 0; i < trials; ++i) {
    const auto f = random_bump_state(lab.torus, rng, 3, lab.temp_floor);
    const auto qp = op.gain_symmetric(f);
    for (double q : {0.1, 1.0, 10.0}) s.add(verify_torus_gain_bound(f, op, q, lab.tol, &qp));
  }
  return s;
}

inline TrialSummary run_moment_trials(long trials, unsigned long long seed, const LabSetup& lab = {}) {
  TrialSummary s{"moment_w11"};
  s.seed = seed;
  std::mt19937_64 rng(seed);
  const CollisionOperator op(lab.kernel, lab.torus, SphereQuadrature(lab.n_polar, lab.n_azimuth));
  for (long i = 0; i < trials; ++i) {
    const auto g = random_bump_state(lab.torus, rng, 3, lab.temp_floor);
    const auto f = random_bump_state(lab.torus, rng, 3, lab.temp_floor);
    for (double ell : {0.0, 1.0, 2.0, 4.0}) {
      const auto rep = verify_moment_and_w11_bounds(g, f, op, ell, lab.tol);
      for (const auto* o : {&rep.moment_gain, &rep.moment_loss, &rep.w11_gain, &rep.w11_loss}) s.add(*o);
    }
  }
  return s;
}

inline TrialSummary run_dispersion_trials(long trials, unsigned long long seed, const LabSetup& lab = {}) {
  TrialSummary s{"dispersion"};
  s.seed = seed;
  std::mt19937_64 rng(seed);
  const PhaseGrid g{DomainKind::line, 4.0, 16, 4.0, 8};
  for (long i = 0; i < trials; ++i) {
    const auto st = random_bump_state(g, rng, 3, lab.temp_floor);
    for (double t : {1.0, 2.0, 5.0, 10.0}) {
      const auto c = dispersion_bound_check(st, t);
      s.add(VerifyOutcome{c.lhs, c.rhs, c.holds});
    }
  }
  return s;
}

inline TrialSummary run_rho_l2_trials(long trials, unsigned long long seed, const LabSetup& lab = {}) {
  TrialSummary s{"rho_l2"};
  s.seed = seed;
  std::mt19937_64 rng(seed);
  const PhaseGrid g{DomainKind::torus, 1.0, 8, 5.0, 8};
  for (long i = 0; i < trials; ++i) {
    const auto st = random_bump_state(g, rng, 3, lab.temp_floor);
    const MaxwellianSpec ref{moments(st).mass, {0, 0, 0}, 1.0};
    const double eps = log_uniform(rng, 0.05, 5.0);
    const auto sides = rho_l2_sides(st, ref, eps, x_norm(st).value);
    s.add(VerifyOutcome{sides.lhs, sides.rhs, sides.lhs <= sides.rhs * (1.0 + 1e-12)});
  }
  return s;
}

inline GrowthBoundSpec random_growth_spec(GrowthMode mode, std::mt19937_64& rng, int n = 512) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  GrowthBoundSpec s;
  s.mode = mode;
  const double T = 0.5 + 9.5 * U(rng);
  s.t.resize(n);
  for (int i = 0; i < n; ++i) s.t[i] = T * i / (n - 1);
  if (mode == GrowthMode::bony) {
    s.c = log_uniform(rng, 0.05, 10.0);
    s.phi0 = 5.0 * U(rng);
    const double base = 2.0 * U(rng) * U(rng);
    const double amp = 3.0 * U(rng), t0 = T * U(rng), w = 0.05 * T + T * U(rng);
    s.a.resize(n);
    for (int i = 0; i < n; ++i) s.a[i] = base + amp * std::exp(-0.5 * std::pow((s.t[i] - t0) / w, 2));
  } else {
    s.alpha = 0.05 + 0.9 * U(rng);
    s.m = log_uniform(rng, 0.2, 5.0);
    s.eps = log_uniform(rng, 0.1, 2.0);
    s.c0 = s.m * (1.0 + 5.0 * U(rng));
    s.c1 = log_uniform(rng, 0.01, 2.0);
    s.c2 = 2.0 * U(rng);
  }
  return s;
}

struct OracleTrials {
  TrialSummary bound{"gronwall"};
  long not_converged = 0;
  int max_iterations = 0;
};

// oracle <= closed-form bound pointwise, compared in log space
inline OracleTrials run_oracle_trials(GrowthMode mode, long trials, unsigned long long seed) {
  OracleTrials out;
  out.bound.name = mode == GrowthMode::bony ? "gronwall_bony" : "gronwall_small_entropy";
  out.bound.seed = seed;
  std::mt19937_64 rng(seed);
  for (long i = 0; i < trials; ++i) {
    const auto s = random_growth_spec(mode, rng);
    const auto o = maximal_solution_oracle(s);
    if (!o.converged) ++out.not_converged;
    out.max_iterations = std::max(out.max_iterations, o.iterations);
    VerifyOutcome worst{0.0, 0.0, true};
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.t.size(); ++k) {
      double lb;
      if (mode == GrowthMode::bony)
        lb = bony_bound_log2(s.c, std::span(s.t.data(), k + 1), std::span(s.a.data(), k + 1), s.phi0) * std::log(2.0);
      else
        lb = small_entropy_bound_log(s, s.t[k]);
      const double lo = std::log(std::max(o.phi[k], 1e-300));
      const double gap = lo - lb;
      if (gap > worst_gap) worst_gap = gap, worst = VerifyOutcome{lo, lb, true};
    }
    worst.holds = o.converged && !o.diverged && worst_gap <= 1e-12;
    // margins in log space: report the multiplicative headroom
    out.bound.add(VerifyOutcome{std::exp(std::min(0.0, worst.lhs - worst.rhs)), 1.0, worst.holds});
  }
  return out;
}

}  // namespace boltz1d
