#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "core.hpp"

namespace boltz1d {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1]
inline Rule1D gauss_legendre(int n) {
  if (n < 1) throw Error("gauss_legendre: need at least one node");
  Rule1D rule{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// product rule on S^2: Gauss-Legendre in mu = cos(theta) times a uniform azimuth grid.
// weights sum to 4*pi
struct SphereQuadrature {
  int n_polar = 16;
  int n_azimuth = 8;
  std::vector<double> mu, w_mu, cos_phi, sin_phi;
  double w_phi = 0.0;

  SphereQuadrature() : SphereQuadrature(16, 8) {}
  SphereQuadrature(int np, int na) : n_polar(np), n_azimuth(na) {
    if (np < 1 || na < 1) throw Error("sphere quadrature needs positive node counts");
    const Rule1D gl = gauss_legendre(np);
    mu = gl.nodes;
    w_mu = gl.weights;
    w_phi = 2.0 * pi / na;
    for (int k = 0; k < na; ++k) {
      // half-step offset keeps the nodes off the frame axes
      const double phi = w_phi * (k + 0.5);
      cos_phi.push_back(std::cos(phi));
      sin_phi.push_back(std::sin(phi));
    }
  }
  int size() const { return n_polar * n_azimuth; }
};

inline double trapezoid(std::span<const double> t, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

// orthonormal pair completing n to a right-handed frame
inline void complete_frame(const Vec3& n, Vec3& e1, Vec3& e2) {
  const Vec3 a = std::abs(n[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const double d = dot(a, n);
  e1 = a - d * n;
  const double l = norm(e1);
  e1 = (1.0 / l) * e1;
  e2 = {n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0]};
}

}  // namespace boltz1d
