#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "core.hpp"
#include "kernel.hpp"
#include "quadrature.hpp"
#include "state.hpp"

namespace boltz1d {

inline std::pair<Vec3, Vec3> post_collision_velocities(const Vec3& v, const Vec3& vs, const Vec3& sigma) {
  if (std::abs(norm(sigma) - 1.0) > 1e-12) throw Error("sigma must be a unit vector");
  const Vec3 c = 0.5 * (v + vs);
  const double h = 0.5 * norm(v - vs);
  return {c + h * sigma, c - h * sigma};
}

// how off-grid post-collisional values are read back:
// log_trilinear interpolates log f (geometric weights), trilinear interpolates f
enum class Interpolation { log_trilinear, trilinear };

inline const char* to_string(Interpolation i) { return i == Interpolation::log_trilinear ? "log" : "linear"; }

struct CollisionField {
  PhaseGrid grid;
  std::vector<double> values;                      // (x, v) layout, like states
  std::vector<std::array<double, 5>> residuals;    // per x-cell: mass, momentum (3), energy
  double leakage = 0.0;                            // dx dv^6 sum of pair rates whose outgoing velocities leave the box
  long leak_events = 0;
  double projection_magnitude = 0.0;               // ||correction||_L1 / ||field||_L1

  CollisionField() = default;
  explicit CollisionField(const PhaseGrid& g) : grid(g), values(g.size(), 0.0), residuals(g.Nx) {}
  double at(int ix, int iv) const { return values[std::size_t(ix) * grid.nv3() + iv]; }
  double& at(int ix, int iv) { return values[std::size_t(ix) * grid.nv3() + iv]; }
};

inline std::array<double, 5> collision_invariants(const Vec3& v) { return {1.0, v[0], v[1], v[2], dot(v, v)}; }

inline void compute_residuals(CollisionField& q) {
  const auto& g = q.grid;
  q.residuals.assign(g.Nx, {0, 0, 0, 0, 0});
  for (int ix = 0; ix < g.Nx; ++ix)
    for (int iv = 0; iv < g.nv3(); ++iv) {
      const auto psi = collision_invariants(g.velocity(iv));
      for (int k = 0; k < 5; ++k) q.residuals[ix][k] += g.dv3() * psi[k] * q.at(ix, iv);
    }
}

// scale against which the residuals are judged relative
inline std::array<double, 5> residual_scale(const CollisionField& q, int ix) {
  const auto& g = q.grid;
  std::array<double, 5> s{0, 0, 0, 0, 0};
  for (int iv = 0; iv < g.nv3(); ++iv) {
    const auto psi = collision_invariants(g.velocity(iv));
    for (int k = 0; k < 5; ++k) s[k] += g.dv3() * std::abs(psi[k] * q.at(ix, iv));
  }
  return s;
}

namespace detail {

// dense solve with partial pivoting; throws when the matrix is numerically singular
template <int N>
std::array<double, N> solve(std::array<std::array<double, N>, N> a, std::array<double, N> b) {
  double scale = 0.0;
  for (int i = 0; i < N; ++i) scale = std::max(scale, std::abs(a[i][i]));
  for (int c = 0; c < N; ++c) {
    int p = c;
    for (int r = c + 1; r < N; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (!(std::abs(a[p][c]) > 1e-14 * scale)) throw Error("singular Gram system in the conservative projection");
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (int r = c + 1; r < N; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < N; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::array<double, N> x{};
  for (int r = N - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < N; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

inline std::array<double, 5> projection_coefficients(const CollisionField& q, const std::array<double, 5>& res,
                                                     const double* w) {
  const auto& g = q.grid;
  std::array<std::array<double, 5>, 5> gram{};
  for (int iv = 0; iv < g.nv3(); ++iv) {
    const auto psi = collision_invariants(g.velocity(iv));
    const double wi = (w ? w[iv] : 1.0) * g.dv3();
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) gram[a][b] += wi * psi[a] * psi[b];
  }
  return solve<5>(gram, res);
}

inline double apply_correction(CollisionField& q, int ix, const std::array<double, 5>& lam, const double* w) {
  const auto& g = q.grid;
  double l1 = 0.0;
  for (int iv = 0; iv < g.nv3(); ++iv) {
    const auto psi = collision_invariants(g.velocity(iv));
    double c = 0.0;
    for (int k = 0; k < 5; ++k) c += lam[k] * psi[k];
    c *= w ? w[iv] : 1.0;
    q.at(ix, iv) -= c;
    l1 += std::abs(c);
  }
  return l1;
}

}  // namespace detail

// Subtract w(v) * sum_k lambda_k psi_k(v) per x-cell so the five moments vanish.
// w = 1 is the plain L2-orthogonal projection. A cell whose weighted Gram matrix is
// singular falls back to w = 1; a singular unweighted system is a hard error.
inline CollisionField conservative_projection(const CollisionField& raw, const std::vector<double>* weights = nullptr) {
  const auto& g = raw.grid;
  CollisionField out = raw;
  compute_residuals(out);
  const auto raw_res = out.residuals;
  double corr_l1 = 0.0, field_l1 = 0.0;
  for (double v : raw.values) field_l1 += std::abs(v);
  std::vector<const double*> used_w(g.Nx, nullptr);
  for (int ix = 0; ix < g.Nx; ++ix) {
    const auto& res = raw_res[ix];
    if (std::all_of(res.begin(), res.end(), [](double r) { return r == 0.0; })) continue;
    const double* w = weights ? weights->data() + std::size_t(ix) * g.nv3() : nullptr;
    std::array<double, 5> lam;
    try {
      lam = detail::projection_coefficients(out, res, w);
    } catch (const Error&) {
      if (!w) throw;
      w = nullptr;
      lam = detail::projection_coefficients(out, res, w);
    }
    corr_l1 += detail::apply_correction(out, ix, lam, w);
    used_w[ix] = w;
  }
  // a second sweep with the same weight removes the rounding; an unweighted one would
  // push the far velocity corners, where f is ~1e-20, negative
  compute_residuals(out);
  for (int ix = 0; ix < g.Nx; ++ix) {
    const double* w = used_w[ix];
    const auto lam = detail::projection_coefficients(out, out.residuals[ix], w);
    detail::apply_correction(out, ix, lam, w);
  }
  out.residuals = raw_res;
  out.projection_magnitude = field_l1 > 0.0 ? corr_l1 / field_l1 : 0.0;
  return out;
}

// Quadrature collision operator on a fixed grid, kernel and sigma rule.
// Geometry that depends only on the lattice offset v - v* is tabulated once.
class CollisionOperator {
 public:
  CollisionOperator(CollisionKernel kernel, const PhaseGrid& grid, SphereQuadrature quad = SphereQuadrature(16, 8),
                    Interpolation interp = Interpolation::trilinear)
      : kernel_(std::move(kernel)), grid_(grid), quad_(std::move(quad)), interp_(interp) {
    grid_.validate();
    build_tables();
  }

  const CollisionKernel& kernel() const { return kernel_; }
  const PhaseGrid& grid() const { return grid_; }
  const SphereQuadrature& quadrature() const { return quad_; }
  Interpolation interpolation() const { return interp_; }

  // Phi(|v_a - v_b|) from the lattice table
  double cross_section(int a, int b) const { return phi_[offset_index(a, b)]; }

  CollisionField loss(const DistributionState& g, const DistributionState& f) const {
    check(g);
    check(f);
    const int N = grid_.nv3(), X = grid_.Nx;
    const auto G = transpose(g), F = transpose(f);
    std::vector<double> nu(std::size_t(N) * X, 0.0);
    for (int a = 0; a < N; ++a) {
      double* out = nu.data() + std::size_t(a) * X;
      for (int b = 0; b < N; ++b) {
        const double p = phi_[offset_index(a, b)];
        if (p == 0.0) continue;
        const double* gb = G.data() + std::size_t(b) * X;
        for (int x = 0; x < X; ++x) out[x] += p * gb[x];
      }
    }
    CollisionField q(grid_);
    for (int a = 0; a < N; ++a)
      for (int x = 0; x < X; ++x) q.at(x, a) = grid_.dv3() * nu[std::size_t(a) * X + x] * F[std::size_t(a) * X + x];
    compute_residuals(q);
    return q;
  }

  CollisionField gain(const DistributionState& g, const DistributionState& f) const {
    check(g);
    check(f);
    if (&g == &f || g.values == f.values) return gain_symmetric(f);
    const int X = grid_.Nx, nsig = quad_.size();
    const auto lg = padded(g), lf = padded(f);
    const auto G = transpose(g), F = transpose(f);
    std::vector<double> acc(std::size_t(grid_.nv3()) * X, 0.0);
    std::vector<double> ta(X), tb(X);
    double leak = 0.0;
    long events = 0;
    const bool logm = interp_ == Interpolation::log_trilinear;
    // sigma and -sigma swap the two outgoing velocities, so one stencil pair serves both nodes
    for_each_pair([&](int a, int b, int off) {
      std::fill(ta.begin(), ta.end(), 0.0);
      std::fill(tb.begin(), tb.end(), 0.0);
      double wleak = 0.0;
      const double* Wn = weights_.data() + std::size_t(off) * nsig;
      for_each_sigma_folded(a, b, off, [&](double, const Stencil& sp, const Stencil& sq, int s) {
        const int m = mirror_[s];
        const double W = Wn[s], Wm = m >= 0 ? Wn[m] : 0.0;
        if (!sp.inside || !sq.inside) {
          wleak += W + Wm;
          events += (W > 0.0) + (Wm > 0.0);
          return;
        }
        const double *fp[8], *fq[8], *gp[8], *gq[8];
        for (int k = 0; k < 8; ++k) {
          fp[k] = lf.data() + std::size_t(sp.base + corner_[k]) * X;
          fq[k] = lf.data() + std::size_t(sq.base + corner_[k]) * X;
          gp[k] = lg.data() + std::size_t(sp.base + corner_[k]) * X;
          gq[k] = lg.data() + std::size_t(sq.base + corner_[k]) * X;
        }
        for (int x = 0; x < X; ++x) {
          double u1 = 0.0, u2 = 0.0, u3 = 0.0, u4 = 0.0;
          for (int k = 0; k < 8; ++k) {
            u1 += sp.w[k] * fp[k][x];
            u2 += sq.w[k] * gq[k][x];
            u3 += sq.w[k] * fq[k][x];
            u4 += sp.w[k] * gp[k][x];
          }
          // f(v') g(v*') and f(v*') g(v')
          const double p1 = logm ? fast_exp(u1 + u2) : u1 * u2;
          const double p2 = logm ? fast_exp(u3 + u4) : u3 * u4;
          ta[x] += W * p1 + Wm * p2;
          tb[x] += W * p2 + Wm * p1;
        }
      });
      double* qa = acc.data() + std::size_t(a) * X;
      double* qb = acc.data() + std::size_t(b) * X;
      for (int x = 0; x < X; ++x) qa[x] += ta[x], qb[x] += tb[x];
      if (wleak > 0.0)
        for (int x = 0; x < X; ++x)
          leak += wleak * (F[std::size_t(a) * X + x] * G[std::size_t(b) * X + x] +
                           F[std::size_t(b) * X + x] * G[std::size_t(a) * X + x]);
    });
    return finish(acc, leak, events);
  }

  CollisionField gain_symmetric(const DistributionState& f) const {
    check(f);
    const int X = grid_.Nx;
    const auto lf = padded(f);
    const auto F = transpose(f);
    std::vector<double> acc(std::size_t(grid_.nv3()) * X, 0.0);
    std::vector<double> t(X);
    double leak = 0.0;
    long events = 0;
    const bool logm = interp_ == Interpolation::log_trilinear;
    for_each_pair([&](int a, int b, int off) {
      std::fill(t.begin(), t.end(), 0.0);
      double wleak = 0.0;
      for_each_sigma_folded(a, b, off, [&](double W, const Stencil& sp, const Stencil& sq, int) {
        if (!sp.inside || !sq.inside) {
          wleak += W;
          ++events;
          return;
        }
        const double* p[8];
        const double* q[8];
        for (int k = 0; k < 8; ++k) {
          p[k] = lf.data() + std::size_t(sp.base + corner_[k]) * X;
          q[k] = lf.data() + std::size_t(sq.base + corner_[k]) * X;
        }
        double* tt = t.data();
        if (logm) {
          for (int x = 0; x < X; ++x) {
            double s = 0.0;
            for (int k = 0; k < 8; ++k) s += sp.w[k] * p[k][x] + sq.w[k] * q[k][x];
            tt[x] += W * fast_exp(s);
          }
        } else {
          for (int x = 0; x < X; ++x) {
            double u = 0.0, v = 0.0;
            for (int k = 0; k < 8; ++k) u += sp.w[k] * p[k][x], v += sq.w[k] * q[k][x];
            tt[x] += W * u * v;
          }
        }
      });
      double* qa = acc.data() + std::size_t(a) * X;
      double* qb = acc.data() + std::size_t(b) * X;
      for (int x = 0; x < X; ++x) qa[x] += t[x], qb[x] += t[x];
      if (wleak > 0.0)
        for (int x = 0; x < X; ++x) leak += 2.0 * wleak * F[std::size_t(a) * X + x] * F[std::size_t(b) * X + x];
    });
    return finish(acc, leak, events);
  }

  // Q(f,f) = Q+ - Q-, raw (unprojected)
  CollisionField raw_collision(const DistributionState& f, CollisionField* loss_out = nullptr) const {
    CollisionField qp = gain_symmetric(f);
    CollisionField qm = loss(f, f);
    for (std::size_t i = 0; i < qp.values.size(); ++i) qp.values[i] -= qm.values[i];
    compute_residuals(qp);
    if (loss_out) *loss_out = std::move(qm);
    return qp;
  }

  // projected Q(f,f); the correction is weighted by the loss field so a uniform relative
  // bias of the gain term is removed exactly
  CollisionField collide(const DistributionState& f) const {
    CollisionField qm;
    CollisionField raw = raw_collision(f, &qm);
    CollisionField out = conservative_projection(raw, &qm.values);
    out.leakage = raw.leakage;
    out.leak_events = raw.leak_events;
    return out;
  }

  struct EntropyProduction {
    double value = 0.0;
    long clamped = 0;
  };

  // D_H = 1/4 int dx sum dv^6 sum_sigma w B (f'f'_* - f f_*) log(f'f'_*/(f f_*))
  EntropyProduction entropy_production(const DistributionState& f) const {
    check(f);
    const int X = grid_.Nx;
    const auto lf = padded(f);
    const auto F = transpose(f);
    std::vector<double> logf(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) logf[i] = std::log(std::max(F[i], tiny_));
    EntropyProduction ep;
    double total = 0.0;
    std::vector<double> t(X), vp(X), vq(X);
    for_each_pair([&](int a, int b, int off) {
      std::fill(t.begin(), t.end(), 0.0);
      const double* fa = F.data() + std::size_t(a) * X;
      const double* fb = F.data() + std::size_t(b) * X;
      const double* la = logf.data() + std::size_t(a) * X;
      const double* lb = logf.data() + std::size_t(b) * X;
      for_each_sigma_folded(a, b, off, [&](double W, const Stencil& sp, const Stencil& sq, int) {
        if (!sp.inside || !sq.inside) return;
        interp_row(sp, lf, vp.data());
        interp_row(sq, lf, vq.data());
        for (int x = 0; x < X; ++x) {
          const double R = fa[x] * fb[x];
          double P, logP;
          if (interp_ == Interpolation::log_trilinear) {
            logP = vp[x] + vq[x];
            P = std::exp(logP);
          } else {
            P = vp[x] * vq[x];
            logP = std::log(std::max(P, tiny_ * tiny_));
          }
          if (P == 0.0 && R == 0.0) continue;
          double lr = logP - (la[x] + lb[x]);
          if (P == 0.0 || R == 0.0 || std::abs(lr) > 1e3) {
            lr = std::clamp(lr, -1e3, 1e3);
            ++ep.clamped;
          }
          t[x] += W * std::abs(P - R) * std::abs(lr);
        }
      });
      for (int x = 0; x < X; ++x) total += t[x];
    });
    // unordered pairs stand for two ordered pairs: 2 * 1/4
    ep.value = 0.5 * total * grid_.dx() * grid_.dv3() * grid_.dv3();
    return ep;
  }

  // A = dx dv^6 sum Phi(|v - v*|) |v - v*|^2 f f*
  double collision_rate_A(const DistributionState& f) const {
    check(f);
    const int N = grid_.nv3(), X = grid_.Nx;
    const auto F = transpose(f);
    double total = 0.0;
    std::vector<double> t(X);
    for (int a = 0; a < N; ++a) {
      std::fill(t.begin(), t.end(), 0.0);
      for (int b = 0; b < N; ++b) {
        const int o = offset_index(a, b);
        const double w = phi_[o] * r2_[o];
        if (w == 0.0) continue;
        const double* fb = F.data() + std::size_t(b) * X;
        for (int x = 0; x < X; ++x) t[x] += w * fb[x];
      }
      const double* fa = F.data() + std::size_t(a) * X;
      for (int x = 0; x < X; ++x) total += t[x] * fa[x];
    }
    return total * grid_.dx() * grid_.dv3() * grid_.dv3();
  }

  double max_cross_section() const {
    double m = 0.0;
    for (double p : phi_) m = std::max(m, p);
    return m;
  }

 private:
  static constexpr double tiny_ = 1e-300;

  struct Stencil {
    int base = 0;
    bool inside = true;
    double w[8];
  };

  // out[x] = sum_k w_k data[corner_k][x]: the interpolated value, or its log in log mode
  void interp_row(const Stencil& st, const std::vector<double>& data, double* out) const {
    const int X = grid_.Nx;
    const double* p[8];
    for (int k = 0; k < 8; ++k) p[k] = data.data() + std::size_t(st.base + corner_[k]) * X;
    for (int x = 0; x < X; ++x) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += st.w[k] * p[k][x];
      out[x] = s;
    }
  }

  void check(const DistributionState& s) const {
    if (!(s.grid == grid_)) throw GridMismatch();
  }

  int offset_index(int a, int b) const {
    const int N = grid_.Nv, M = 2 * N - 1;
    const int d1 = a / (N * N) - b / (N * N), d2 = (a / N) % N - (b / N) % N, d3 = a % N - b % N;
    return ((d1 + N - 1) * M + (d2 + N - 1)) * M + (d3 + N - 1);
  }

  void build_tables() {
    const int N = grid_.Nv, M = 2 * N - 1, P = N + 2;
    const int nsig = quad_.size();
    const double dv = grid_.dv();
    phi_.assign(std::size_t(M) * M * M, 0.0);
    r2_.assign(phi_.size(), 0.0);
    weights_.assign(phi_.size() * nsig, 0.0);
    disp_.assign(phi_.size() * nsig * 3, 0.0);
    active_.assign(phi_.size(), 0);
    const Rule1D gl = gauss_legendre(16);
    for (int d1 = -(N - 1); d1 <= N - 1; ++d1)
      for (int d2 = -(N - 1); d2 <= N - 1; ++d2)
        for (int d3 = -(N - 1); d3 <= N - 1; ++d3) {
          const int o = ((d1 + N - 1) * M + (d2 + N - 1)) * M + (d3 + N - 1);
          const double ri = std::sqrt(double(d1 * d1 + d2 * d2 + d3 * d3));
          const double r = ri * dv;
          r2_[o] = r * r;
          if (ri == 0.0 || r <= kernel_.R0) continue;
          double phi = 0.0;
          for (int i = 0; i < 16; ++i) phi += gl.weights[i] * kernel_.eval(r, gl.nodes[i]);
          phi_[o] = 2.0 * pi * phi;
          const Vec3 n{d1 / ri, d2 / ri, d3 / ri};
          Vec3 e1, e2;
          complete_frame(n, e1, e2);
          bool any = false;
          for (int j = 0; j < quad_.n_polar; ++j) {
            const double mu = quad_.mu[j], s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
            const double Bv = kernel_.eval(r, mu);
            for (int k = 0; k < quad_.n_azimuth; ++k) {
              const int sidx = j * quad_.n_azimuth + k;
              const Vec3 sig = mu * n + (s * quad_.cos_phi[k]) * e1 + (s * quad_.sin_phi[k]) * e2;
              weights_[std::size_t(o) * nsig + sidx] = quad_.w_mu[j] * quad_.w_phi * Bv;
              for (int c = 0; c < 3; ++c) disp_[(std::size_t(o) * nsig + sidx) * 3 + c] = 0.5 * ri * sig[c];
              any = any || Bv > 0.0;
            }
          }
          active_[o] = any ? 1 : 0;
        }
    // f = g sums are even under sigma -> -sigma; fold each node onto its mirror when the rule allows it
    sym_weights_ = weights_;
    mirror_.assign(nsig, -1);
    if (quad_.n_azimuth % 2 == 0) {
      const int na = quad_.n_azimuth;
      for (std::size_t o = 0; o < phi_.size(); ++o)
        for (int j = 0; j < quad_.n_polar; ++j)
          for (int k = 0; k < na; ++k) {
            const int sidx = j * na + k, midx = (quad_.n_polar - 1 - j) * na + (k + na / 2) % na;
            if (sidx < midx) {
              mirror_[sidx] = midx;
              sym_weights_[o * nsig + sidx] += weights_[o * nsig + midx];
              sym_weights_[o * nsig + midx] = 0.0;
            }
          }
    }
    corner_[0] = 0;
    for (int k = 0; k < 8; ++k) corner_[k] = ((k >> 2) & 1) * P * P + ((k >> 1) & 1) * P + (k & 1);
  }

  template <class Body>
  void for_each_pair(Body&& body) const {
    const int N = grid_.nv3();
    for (int a = 0; a < N; ++a)
      for (int b = a + 1; b < N; ++b) {
        const int o = offset_index(a, b);
        if (!active_[o]) continue;
        body(a, b, o);
      }
  }

  template <class Body>
  void for_each_sigma(int a, int b, int o, Body&& body, bool folded = false) const {
    const int N = grid_.Nv, P = N + 2;
    const int nsig = quad_.size();
    const double c[3] = {0.5 * (a / (N * N) + b / (N * N)), 0.5 * ((a / N) % N + (b / N) % N), 0.5 * (a % N + b % N)};
    const double* W = (folded ? sym_weights_ : weights_).data() + std::size_t(o) * nsig;
    const double* D = disp_.data() + std::size_t(o) * nsig * 3;
    const double lo = -0.5, hi = N - 0.5;
    Stencil sp, sq;
    for (int s = 0; s < nsig; ++s) {
      if (W[s] == 0.0) continue;
      double up[3], uq[3];
      bool in_p = true, in_q = true;
      for (int k = 0; k < 3; ++k) {
        up[k] = c[k] + D[3 * s + k];
        uq[k] = c[k] - D[3 * s + k];
        in_p = in_p && up[k] >= lo && up[k] <= hi;
        in_q = in_q && uq[k] >= lo && uq[k] <= hi;
      }
      sp.inside = in_p;
      sq.inside = in_q;
      if (in_p && in_q) {
        fill(sp, up, P);
        fill(sq, uq, P);
      }
      body(W[s], sp, sq, s);
    }
  }

  template <class Body>
  void for_each_sigma_folded(int a, int b, int o, Body&& body) const {
    for_each_sigma(a, b, o, std::forward<Body>(body), true);
  }

  static void fill(Stencil& st, const double* u, int P) {
    int i[3];
    double t[3];
    for (int k = 0; k < 3; ++k) {
      const double fl = std::floor(u[k]);
      i[k] = int(fl);
      t[k] = u[k] - fl;
    }
    st.base = ((i[0] + 1) * P + (i[1] + 1)) * P + (i[2] + 1);
    for (int k = 0; k < 8; ++k) {
      const double a = (k >> 2) & 1 ? t[0] : 1.0 - t[0];
      const double b = (k >> 1) & 1 ? t[1] : 1.0 - t[1];
      const double cc = k & 1 ? t[2] : 1.0 - t[2];
      st.w[k] = a * b * cc;
    }
  }

  // (v, x) layout with x fastest
  std::vector<double> transpose(const DistributionState& s) const {
    const int N = grid_.nv3(), X = grid_.Nx;
    std::vector<double> t(std::size_t(N) * X);
    for (int x = 0; x < X; ++x)
      for (int v = 0; v < N; ++v) t[std::size_t(v) * X + x] = s.at(x, v);
    return t;
  }

  // ghost-padded (v, x) array holding log f (log mode) or f (linear mode)
  std::vector<double> padded(const DistributionState& s) const {
    const int N = grid_.Nv, P = N + 2, X = grid_.Nx;
    const bool logm = interp_ == Interpolation::log_trilinear;
    const double ghost = logm ? std::log(tiny_) : 0.0;
    std::vector<double> out(std::size_t(P) * P * P * X, ghost);
    for (int i1 = 0; i1 < N; ++i1)
      for (int i2 = 0; i2 < N; ++i2)
        for (int i3 = 0; i3 < N; ++i3) {
          const int iv = grid_.vindex(i1, i2, i3);
          const std::size_t pi_ = std::size_t(((i1 + 1) * P + (i2 + 1)) * P + (i3 + 1)) * X;
          for (int x = 0; x < X; ++x) {
            const double v = s.at(x, iv);
            out[pi_ + x] = logm ? std::log(std::max(v, tiny_)) : v;
          }
        }
    return out;
  }

  CollisionField finish(const std::vector<double>& acc, double leak, long events) const {
    CollisionField q(grid_);
    const int N = grid_.nv3(), X = grid_.Nx;
    for (int v = 0; v < N; ++v)
      for (int x = 0; x < X; ++x) q.at(x, v) = grid_.dv3() * acc[std::size_t(v) * X + x];
    q.leakage = leak * grid_.dx() * grid_.dv3() * grid_.dv3();
    q.leak_events = events;
    compute_residuals(q);
    return q;
  }

  CollisionKernel kernel_;
  PhaseGrid grid_;
  SphereQuadrature quad_;
  Interpolation interp_;
  std::vector<double> phi_, r2_, weights_, sym_weights_, disp_;
  std::vector<char> active_;
  std::vector<int> mirror_;  // folded partner of each representative sigma node, or -1
  int corner_[8];
};

inline CollisionField q_loss(const DistributionState& g, const DistributionState& f, const CollisionKernel& k) {
  require_same_grid(g, f);
  return CollisionOperator(k, f.grid, SphereQuadrature(1, 1)).loss(g, f);
}

inline CollisionField q_gain(const DistributionState& g, const DistributionState& f, const CollisionKernel& k,
                             const SphereQuadrature& quad = SphereQuadrature(16, 8),
                             Interpolation interp = Interpolation::trilinear) {
  require_same_grid(g, f);
  return CollisionOperator(k, f.grid, quad, interp).gain(g, f);
}

}  // namespace boltz1d
