#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "collision.hpp"
#include "core.hpp"
#include "state.hpp"
#include "transport.hpp"

namespace boltz1d {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- X norm

// F1[i1 * Nx + x] = dv^3 sum over (v2, v3) of |f|
inline std::vector<double> v1_marginal(const DistributionState& s) {
  const auto& g = s.grid;
  const int N = g.Nv, X = g.Nx;
  std::vector<double> F(std::size_t(N) * X, 0.0);
  for (int x = 0; x < X; ++x) {
    const double* f = s.row(x);
    for (int i1 = 0; i1 < N; ++i1) {
      double t = 0.0;
      for (int r = 0; r < N * N; ++r) t += std::abs(f[i1 * N * N + r]);
      F[std::size_t(i1) * X + x] = t * g.dv3();
    }
  }
  return F;
}

inline double default_q_max(const PhaseGrid& g) {
  return g.kind == DomainKind::torus ? 4.0 * g.L * g.Nv : 10.0 * g.L / g.Vmax;
}

struct XNorm {
  double value = 0.0;
  double error_bound = 0.0;  // certified gap from q- and x-sampling, not from truncating q at q_max
  double q_at = 0.0;
  std::vector<double> q;
  std::vector<double> profile;  // ||S_q f||_{Linf_x L1_v} at each sampled q
};

// ||S_q f||_{Linf_x L1_v}; on the line the profile is evaluated on a window wide enough to hold
// everything shifted by at most q_reach, so nothing leaves the grid
inline double shifted_density_sup(const std::vector<double>& F, const PhaseGrid& g, double q, double q_reach) {
  const int N = g.Nv, X = g.Nx;
  const bool periodic = g.kind == DomainKind::torus;
  const int pad = periodic ? 0 : int(std::ceil(std::abs(q_reach) * g.Vmax / g.dx())) + 2;
  const int W = X + 2 * pad;
  std::vector<double> in(W), out(W), acc(W, 0.0), tmp;
  for (int i1 = 0; i1 < N; ++i1) {
    std::fill(in.begin(), in.end(), 0.0);
    for (int x = 0; x < X; ++x) in[pad + x] = F[std::size_t(i1) * X + x];
    detail::shift_row(in.data(), out.data(), W, q * g.v(i1) / g.dx(), periodic, tmp);
    for (int x = 0; x < W; ++x) acc[x] += out[x];
  }
  return *std::max_element(acc.begin(), acc.end());
}

// sup over q in a uniform sample of [q0, q_max]; a lower bound of the sup over q >= q0
inline XNorm x_norm(const DistributionState& s, double q_max, int n_q, double q0 = 0.0) {
  if (n_q < 1) throw Error("x_norm: n_q must be at least 1");
  if (q_max < q0) throw Error("x_norm: q_max below the base offset");
  const auto& g = s.grid;
  const auto F = v1_marginal(s);
  XNorm out;
  const double dq = n_q > 1 ? (q_max - q0) / (n_q - 1) : 0.0;
  for (int j = 0; j < n_q; ++j) {
    const double q = q0 + j * dq;
    const double val = shifted_density_sup(F, g, q, q_max);
    out.q.push_back(q);
    out.profile.push_back(val);
    if (val > out.value) out.value = val, out.q_at = q;
  }
  // Lipschitz constants of q -> rho_q and x -> rho_q from the x-variation of each v1 row
  double lip_q = 0.0, lip_x = 0.0;
  for (int i1 = 0; i1 < g.Nv; ++i1) {
    double d = 0.0;
    const double* row = F.data() + std::size_t(i1) * g.Nx;
    for (int x = 0; x + 1 < g.Nx; ++x) d = std::max(d, std::abs(row[x + 1] - row[x]));
    d = std::max(d, g.kind == DomainKind::torus ? std::abs(row[0] - row[g.Nx - 1]) : std::max(row[0], row[g.Nx - 1]));
    lip_q += std::abs(g.v(i1)) * d / g.dx();
    lip_x += d / g.dx();
  }
  out.error_bound = 0.5 * dq * lip_q + 0.5 * g.dx() * lip_x;
  return out;
}

inline XNorm x_norm(const DistributionState& s) { return x_norm(s, default_q_max(s.grid), 256); }

// ||f||_{Linf_x L1_v}
inline double linf_l1(const DistributionState& s) {
  const auto F = v1_marginal(s);
  double best = 0.0;
  for (int x = 0; x < s.grid.Nx; ++x) {
    double t = 0.0;
    for (int i1 = 0; i1 < s.grid.Nv; ++i1) t += F[std::size_t(i1) * s.grid.Nx + x];
    best = std::max(best, t);
  }
  return best;
}

// a collision field viewed as a grid function, so it can be shifted and normed
inline DistributionState as_state(const CollisionField& q) {
  DistributionState s(q.grid);
  s.values = q.values;
  return s;
}

// ---------------------------------------------------------------- entropy

inline double entropy(const DistributionState& s) {
  double h = 0.0;
  for (double f : s.values)
    if (f > 0.0) h += f * std::log(f);
  return h * s.grid.dx() * s.grid.dv3();
}

inline double relative_entropy(const DistributionState& s, const DistributionState& ref) {
  require_same_grid(s, ref);
  const double ms = moments(s).mass, mr = moments(ref).mass;
  if (std::abs(ms - mr) > 1e-6 * std::max(std::abs(ms), std::abs(mr)))
    throw Error("relative entropy needs matching masses");
  double h = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double f = s.values[i];
    if (f <= 0.0) continue;
    const double m = ref.values[i];
    if (m <= 0.0) return std::numeric_limits<double>::infinity();
    h += f * std::log(f / m);
  }
  return h * s.grid.dx() * s.grid.dv3();
}

inline double relative_entropy(const DistributionState& s, const MaxwellianSpec& ref) {
  return relative_entropy(s, maxwellian_state(ref, s.grid));
}

struct EntropyFunctionals {
  double H = 0.0;
  double H_rel = nan_value;
  double D_H = 0.0;
  long clamped = 0;
};

inline EntropyFunctionals entropy_functionals(const DistributionState& s, const std::optional<MaxwellianSpec>& ref,
                                              const CollisionOperator& op) {
  EntropyFunctionals e;
  e.H = entropy(s);
  if (ref) e.H_rel = relative_entropy(s, *ref);
  const auto dh = op.entropy_production(s);
  e.D_H = dh.value;
  e.clamped = dh.clamped;
  return e;
}

// ---------------------------------------------------------------- Bony functionals

// derivative of the 1D Green's function; on a torus of length L it is -sgn(x)/2 + x/L on [-L/2, L/2]
struct GreensFunction {
  DomainKind kind = DomainKind::line;
  double L = 1.0;

  double g_prime(double x) const {
    const double sg = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    if (kind == DomainKind::line) return -0.5 * sg;
    double y = std::remainder(x, L);
    if (std::abs(std::abs(y) - 0.5 * L) < 1e-12 * L) return 0.0;
    const double sy = y > 0.0 ? 1.0 : (y < 0.0 ? -1.0 : 0.0);
    return -0.5 * sy + y / L;
  }
};

struct V1Moments {
  std::vector<double> rho, j, e;  // per cell: dv^3 sum f, dv^3 sum v1 f, dv^3 sum v1^2 f
};

inline V1Moments v1_moments(const DistributionState& s) {
  const auto& g = s.grid;
  const int N = g.Nv;
  V1Moments m{std::vector<double>(g.Nx), std::vector<double>(g.Nx), std::vector<double>(g.Nx)};
  for (int x = 0; x < g.Nx; ++x) {
    const double* f = s.row(x);
    double r = 0.0, j = 0.0, e = 0.0;
    for (int i1 = 0; i1 < N; ++i1) {
      double t = 0.0;
      for (int k = 0; k < N * N; ++k) t += f[i1 * N * N + k];
      const double v1 = g.v(i1);
      r += t;
      j += v1 * t;
      e += v1 * v1 * t;
    }
    m.rho[x] = r * g.dv3();
    m.j[x] = j * g.dv3();
    m.e[x] = e * g.dv3();
  }
  return m;
}

struct BonyFunctionals {
  double L = 0.0;
  double D_B = 0.0;
  double ell = nan_value;  // torus only
};

// velocity sums reduce to the moments rho, j = int v1 f, e = int v1^2 f
inline BonyFunctionals bony_functionals(const DistributionState& s) {
  const auto& g = s.grid;
  const auto m = v1_moments(s);
  const GreensFunction G{g.kind, g.length()};
  const double dx = g.dx();
  BonyFunctionals b;
  double L = 0.0;
  for (int i = 0; i < g.Nx; ++i)
    for (int k = 0; k < g.Nx; ++k) {
      if (i == k) continue;
      L += G.g_prime(g.x(i) - g.x(k)) * (m.j[i] * m.rho[k] - m.rho[i] * m.j[k]);
    }
  b.L = L * dx * dx;
  double d = 0.0, M = 0.0, J = 0.0, E = 0.0;
  for (int i = 0; i < g.Nx; ++i) {
    d += 2.0 * (m.rho[i] * m.e[i] - m.j[i] * m.j[i]);
    M += m.rho[i];
    J += m.j[i];
    E += m.e[i];
  }
  b.D_B = std::max(0.0, d * dx);
  if (g.kind == DomainKind::torus) b.ell = std::max(0.0, 2.0 * (M * E - J * J) * dx * dx / g.length());
  return b;
}

inline double rho_sq(const DistributionState& s) {
  const auto m = v1_moments(s);
  double t = 0.0;
  for (double r : m.rho) t += r * r;
  return t * s.grid.dx();
}

// ---------------------------------------------------------------- rho L2 estimate

struct Sides {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs; }
};

// int rho^2 against (eps m + H(f|M) + sqrt(m H(f|M) / 2)) max(m / eps, X / (log+(X / m) + eps)), unit torus
inline Sides rho_l2_sides(const DistributionState& s, const MaxwellianSpec& ref, double eps, double x_value) {
  if (s.grid.kind != DomainKind::torus) throw Error("rho_l2_sides: torus only");
  if (std::abs(s.grid.L - 1.0) > 1e-12) throw Error("rho_l2_sides: the estimate is stated for a unit torus");
  if (!(eps > 0.0)) throw Error("rho_l2_sides: eps must be positive");
  const double m = ref.m;
  const double h = std::max(0.0, relative_entropy(s, ref));
  Sides out;
  out.lhs = rho_sq(s);
  out.rhs = (eps * m + h + std::sqrt(0.5 * m * h)) * std::max(m / eps, x_value / (log_plus(x_value / m) + eps));
  return out;
}

// ---------------------------------------------------------------- dispersion

struct DispersionCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
};

// ||S_t g||_X against ||g||_{W^{1,1}} / t on the line
inline DispersionCheck dispersion_bound_check(const DistributionState& s, double t, double tol = 1e-9, int n_q = 256) {
  if (s.grid.kind != DomainKind::line) throw Error("the dispersive estimate is a line estimate");
  if (!(t > 0.0)) throw Error("dispersion check needs t > 0");
  DispersionCheck c;
  const double span = std::max(t, default_q_max(s.grid));
  c.lhs = x_norm(s, t + span, n_q, t).value;
  c.rhs = discrete_w11_norm(s) / t;
  c.holds = c.lhs <= c.rhs * (1.0 + tol);
  return c;
}

// ---------------------------------------------------------------- records

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  Vec3 momentum{0.0, 0.0, 0.0};
  double energy = 0.0;
  double H = 0.0;
  double H_rel = nan_value;
  double D_H = nan_value;
  double X = 0.0;
  double X_err = 0.0;
  double L = 0.0;
  double D_B = 0.0;
  double ell = nan_value;
  double A = 0.0;
  double rho_sq = 0.0;
  double leak_v = 0.0;
  double leak_x = 0.0;
  long clip_count = 0;
  long dh_clamped = 0;
};

struct DiagnosticsOptions {
  double q_max = 0.0;  // 0 picks the grid default
  int n_q = 256;
  std::optional<MaxwellianSpec> reference;
  bool entropy_production = true;
};

inline DiagnosticsRecord evaluate(const DistributionState& s, const CollisionOperator& op, const DiagnosticsOptions& o) {
  DiagnosticsRecord r;
  r.t = s.time;
  const auto mo = moments(s);
  r.mass = mo.mass;
  r.momentum = mo.momentum;
  r.energy = mo.energy;
  r.H = entropy(s);
  if (o.reference) r.H_rel = relative_entropy(s, *o.reference);
  if (o.entropy_production) {
    const auto dh = op.entropy_production(s);
    r.D_H = dh.value;
    r.dh_clamped = dh.clamped;
  }
  const auto xn = x_norm(s, o.q_max > 0.0 ? o.q_max : default_q_max(s.grid), o.n_q);
  r.X = xn.value;
  r.X_err = xn.error_bound;
  const auto b = bony_functionals(s);
  r.L = b.L;
  r.D_B = b.D_B;
  r.ell = b.ell;
  r.A = op.collision_rate_A(s);
  r.rho_sq = rho_sq(s);
  r.leak_x = s.meta.outflow_mass;
  return r;
}

inline const char* csv_header() {
  return "t,mass,px,py,pz,energy,H,H_rel,D_H,X,X_err,L,D_B,ell,A,rho_sq,leak_v,leak_x,clip_count";
}

inline std::string csv_row(const DiagnosticsRecord& r) {
  std::string out;
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!out.empty()) out += ',';
    out += buf;
  };
  for (double v : {r.t, r.mass, r.momentum[0], r.momentum[1], r.momentum[2], r.energy, r.H, r.H_rel, r.D_H, r.X,
                   r.X_err, r.L, r.D_B, r.ell, r.A, r.rho_sq, r.leak_v, r.leak_x})
    put(v);
  out += ',' + std::to_string(r.clip_count);
  return out;
}

}  // namespace boltz1d
