#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace boltz1d {

enum class DomainKind { torus, line };

inline const char* to_string(DomainKind k) { return k == DomainKind::torus ? "torus" : "line"; }

// Cell-centred grids. Torus: x in [0, L), line: x in [-L, L]. Velocity: [-Vmax, Vmax]^3.
struct PhaseGrid {
  DomainKind kind = DomainKind::torus;
  double L = 1.0;
  int Nx = 8;
  double Vmax = 6.0;
  int Nv = 10;

  double length() const { return kind == DomainKind::torus ? L : 2.0 * L; }
  double x_min() const { return kind == DomainKind::torus ? 0.0 : -L; }
  double dx() const { return length() / Nx; }
  double dv() const { return 2.0 * Vmax / Nv; }
  double dv3() const { const double h = dv(); return h * h * h; }
  double x(int i) const { return x_min() + (i + 0.5) * dx(); }
  double v(int k) const { return -Vmax + (k + 0.5) * dv(); }
  int nv3() const { return Nv * Nv * Nv; }
  std::size_t size() const { return std::size_t(Nx) * std::size_t(nv3()); }
  int vindex(int i1, int i2, int i3) const { return (i1 * Nv + i2) * Nv + i3; }
  Vec3 velocity(int iv) const { return {v(iv / (Nv * Nv)), v((iv / Nv) % Nv), v(iv % Nv)}; }

  void validate() const {
    if (Nx < 2) throw Error("grid.Nx must be at least 2");
    if (Nv < 2 || Nv % 2 != 0) throw Error("grid.Nv must be even and at least 2");
    if (!(Vmax > 0.0)) throw Error("grid.Vmax must be positive");
    if (!(L > 0.0)) throw Error("grid.L must be positive");
  }

  bool operator==(const PhaseGrid& o) const {
    return kind == o.kind && L == o.L && Nx == o.Nx && Vmax == o.Vmax && Nv == o.Nv;
  }
};

struct StateMetadata {
  double velocity_leakage = 0.0;  // datum mass outside the velocity box, when a tail bound is known
  double outflow_mass = 0.0;      // mass discarded at the ends of the line
};

// values laid out row-major in (x, v1, v2, v3)
struct DistributionState {
  PhaseGrid grid;
  std::vector<double> values;
  double time = 0.0;
  StateMetadata meta;

  DistributionState() = default;
  explicit DistributionState(const PhaseGrid& g, double t = 0.0) : grid(g), values(g.size(), 0.0), time(t) {}

  double& at(int ix, int iv) { return values[std::size_t(ix) * grid.nv3() + iv]; }
  double at(int ix, int iv) const { return values[std::size_t(ix) * grid.nv3() + iv]; }
  const double* row(int ix) const { return values.data() + std::size_t(ix) * grid.nv3(); }
  double* row(int ix) { return values.data() + std::size_t(ix) * grid.nv3(); }
};

inline void require_same_grid(const DistributionState& a, const DistributionState& b) {
  if (!(a.grid == b.grid)) throw GridMismatch();
}

struct MaxwellianSpec {
  double m = 1.0;
  Vec3 u{0.0, 0.0, 0.0};
  double T = 1.0;
};

// Maxwellian velocity profile with unit discrete mass dv^3 sum = 1
inline std::vector<double> unit_maxwellian(const PhaseGrid& g, const Vec3& u, double T) {
  if (!(T > 0.0)) throw Error("temperature must be positive");
  std::vector<double> out(g.nv3());
  double s = 0.0;
  for (int iv = 0; iv < g.nv3(); ++iv) {
    const Vec3 c = g.velocity(iv) - u;
    out[iv] = std::exp(-dot(c, c) / (2.0 * T));
    s += out[iv];
  }
  if (!(s > 0.0)) throw Error("Maxwellian underflows on the velocity grid");
  for (double& x : out) x /= s * g.dv3();
  return out;
}

inline DistributionState discretize(const std::function<double(double, const Vec3&)>& datum, const PhaseGrid& g,
                                    std::optional<double> tail_mass = std::nullopt) {
  g.validate();
  DistributionState s(g);
  for (int ix = 0; ix < g.Nx; ++ix)
    for (int iv = 0; iv < g.nv3(); ++iv) {
      const double val = datum(g.x(ix), g.velocity(iv));
      if (!(val >= 0.0) || !std::isfinite(val)) {
        std::ostringstream os;
        os << "datum is negative or not finite at x=" << g.x(ix) << " v-node " << iv;
        throw Error(os.str());
      }
      s.at(ix, iv) = val;
    }
  if (tail_mass) s.meta.velocity_leakage = *tail_mass;
  return s;
}

// spatially homogeneous Maxwellian of total mass m, renormalised on the grid
inline DistributionState maxwellian_state(const MaxwellianSpec& spec, const PhaseGrid& g) {
  g.validate();
  const auto prof = unit_maxwellian(g, spec.u, spec.T);
  DistributionState s(g);
  const double rho = spec.m / g.length();
  for (int ix = 0; ix < g.Nx; ++ix)
    for (int iv = 0; iv < g.nv3(); ++iv) s.at(ix, iv) = rho * prof[iv];
  return s;
}

struct Moments {
  double mass = 0.0;
  Vec3 momentum{0.0, 0.0, 0.0};
  double energy = 0.0;
};

inline Moments moments(const DistributionState& s) {
  const auto& g = s.grid;
  Moments m;
  for (int ix = 0; ix < g.Nx; ++ix) {
    const double* f = s.row(ix);
    for (int iv = 0; iv < g.nv3(); ++iv) {
      const Vec3 v = g.velocity(iv);
      m.mass += f[iv];
      m.momentum = m.momentum + f[iv] * v;
      m.energy += f[iv] * dot(v, v);
    }
  }
  const double w = g.dx() * g.dv3();
  m.mass *= w;
  m.momentum = w * m.momentum;
  m.energy *= w;
  return m;
}

inline double weighted_norm(const DistributionState& s, double ell) {
  if (!(ell >= 0.0)) throw Error("weight exponent must be nonnegative");
  const auto& g = s.grid;
  double t = 0.0;
  for (int iv = 0; iv < g.nv3(); ++iv) {
    const Vec3 v = g.velocity(iv);
    const double w = std::pow(1.0 + dot(v, v), ell / 2.0);
    double col = 0.0;
    for (int ix = 0; ix < g.Nx; ++ix) col += std::abs(s.at(ix, iv));
    t += w * col;
  }
  return t * g.dx() * g.dv3();
}

inline double l1_norm(const DistributionState& s) { return weighted_norm(s, 0.0); }

// L1 norm plus L1 norms of forward-difference quotients in x, v1, v2, v3.
// Zero ghosts outside the velocity box and outside the line; periodic wrap on the torus.
inline double discrete_w11_norm(const DistributionState& s) {
  const auto& g = s.grid;
  const int N = g.Nv;
  double base = 0.0, dx_part = 0.0, dv_part = 0.0;
  for (int ix = 0; ix < g.Nx; ++ix) {
    const int jx = ix + 1;
    const double* f = s.row(ix);
    const double* fn = nullptr;
    if (jx < g.Nx) fn = s.row(jx);
    else if (g.kind == DomainKind::torus) fn = s.row(0);
    for (int i1 = 0; i1 < N; ++i1)
      for (int i2 = 0; i2 < N; ++i2)
        for (int i3 = 0; i3 < N; ++i3) {
          const int iv = g.vindex(i1, i2, i3);
          const double a = f[iv];
          base += std::abs(a);
          dx_part += std::abs((fn ? fn[iv] : 0.0) - a);
          dv_part += std::abs((i1 + 1 < N ? f[g.vindex(i1 + 1, i2, i3)] : 0.0) - a);
          dv_part += std::abs((i2 + 1 < N ? f[g.vindex(i1, i2 + 1, i3)] : 0.0) - a);
          dv_part += std::abs((i3 + 1 < N ? f[g.vindex(i1, i2, i3 + 1)] : 0.0) - a);
        }
  }
  const double w = g.dx() * g.dv3();
  return w * (base + dx_part / g.dx() + dv_part / g.dv());
}

struct DensityVelocity {
  std::vector<double> rho;
  std::vector<Vec3> u;
  std::vector<bool> defined;
};

inline DensityVelocity density_and_velocity(const DistributionState& s) {
  const auto& g = s.grid;
  DensityVelocity out{std::vector<double>(g.Nx, 0.0), std::vector<Vec3>(g.Nx, Vec3{0, 0, 0}),
                      std::vector<bool>(g.Nx, false)};
  for (int ix = 0; ix < g.Nx; ++ix) {
    const double* f = s.row(ix);
    double r = 0.0;
    Vec3 j{0, 0, 0};
    for (int iv = 0; iv < g.nv3(); ++iv) {
      r += f[iv];
      j = j + f[iv] * g.velocity(iv);
    }
    out.rho[ix] = r * g.dv3();
    if (r > 0.0) {
      out.u[ix] = (1.0 / r) * j;
      out.defined[ix] = true;
    }
  }
  return out;
}

inline DistributionState operator+(const DistributionState& a, const DistributionState& b) {
  require_same_grid(a, b);
  DistributionState out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  return out;
}

// text snapshot: header lines, then one value per line in (x, v1, v2, v3) order
inline void write_snapshot(std::ostream& os, const DistributionState& s) {
  char buf[64];
  os << "# boltz1d state snapshot\n";
  os << "kind " << to_string(s.grid.kind) << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", s.grid.L);
  os << "L " << buf << "\n";
  os << "Nx " << s.grid.Nx << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", s.grid.Vmax);
  os << "Vmax " << buf << "\n";
  os << "Nv " << s.grid.Nv << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", s.time);
  os << "time " << buf << "\n";
  os << "values " << s.values.size() << "\n";
  for (double v : s.values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << "\n";
  }
}

inline DistributionState read_snapshot(std::istream& is) {
  std::string line, key;
  PhaseGrid g;
  double t = 0.0;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ls >> key;
    if (key == "kind") {
      std::string k;
      ls >> k;
      if (k == "torus") g.kind = DomainKind::torus;
      else if (k == "line") g.kind = DomainKind::line;
      else throw Error("snapshot: unknown domain kind " + k);
    } else if (key == "L") ls >> g.L;
    else if (key == "Nx") ls >> g.Nx;
    else if (key == "Vmax") ls >> g.Vmax;
    else if (key == "Nv") ls >> g.Nv;
    else if (key == "time") ls >> t;
    else if (key == "values") { ls >> n; break; }
    else throw Error("snapshot: unexpected header key " + key);
  }
  g.validate();
  if (n != g.size()) throw Error("snapshot: value count does not match the grid");
  DistributionState s(g, t);
  for (std::size_t i = 0; i < n; ++i)
    if (!(is >> s.values[i])) throw Error("snapshot: truncated value list");
  return s;
}

}  // namespace boltz1d
