#pragma once

#include <cmath>
#include <vector>

#include "core.hpp"
#include "state.hpp"

namespace boltz1d {

namespace detail {

// translate one x-profile by d cells with linear interpolation; returns the mass pushed off a line
inline double shift_row(const double* in, double* out, int n, double d, bool periodic, std::vector<double>& tmp) {
  double k = std::floor(d);
  double th = d - k;
  if (th < 1e-12) th = 0.0;
  if (th > 1.0 - 1e-12) th = 0.0, k += 1.0;
  tmp.assign(n, 0.0);
  double kept = 0.0, total = 0.0;
  for (int i = 0; i < n; ++i) total += in[i];
  // out[i] = (1 - th) in[i - k] + th in[i - k - 1]
  if (periodic) {
    long kk = static_cast<long>(k) % n;
    if (kk < 0) kk += n;
    for (int i = 0; i < n; ++i) {
      const long j0 = (i - kk + 2L * n) % n;
      const long j1 = (j0 - 1 + n) % n;
      tmp[i] = (1.0 - th) * in[j0] + th * in[j1];
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double j0 = i - k, j1 = i - k - 1.0;
      double v = 0.0;
      if (j0 >= 0.0 && j0 < n) v += (1.0 - th) * in[long(j0)];
      if (j1 >= 0.0 && j1 < n) v += th * in[long(j1)];
      tmp[i] = v;
      kept += v;
    }
  }
  for (int i = 0; i < n; ++i) out[i] = tmp[i];
  return periodic ? 0.0 : total - kept;
}

}  // namespace detail

// S_q f(x, v) = f(x - q v1, v), piecewise-linear in x between cell centres
inline DistributionState shift(const DistributionState& s, double q) {
  const auto& g = s.grid;
  DistributionState out = s;
  if (q == 0.0) return out;
  const int X = g.Nx, N = g.Nv;
  const bool periodic = g.kind == DomainKind::torus;
  std::vector<double> in(X), res(X), tmp;
  double lost = 0.0;
  for (int i1 = 0; i1 < N; ++i1) {
    const double d = q * g.v(i1) / g.dx();
    for (int rest = 0; rest < N * N; ++rest) {
      const int iv = i1 * N * N + rest;
      for (int x = 0; x < X; ++x) in[x] = s.at(x, iv);
      lost += detail::shift_row(in.data(), res.data(), X, d, periodic, tmp);
      for (int x = 0; x < X; ++x) out.at(x, iv) = res[x];
    }
  }
  out.meta.outflow_mass += lost * g.dx() * g.dv3();
  return out;
}

}  // namespace boltz1d
