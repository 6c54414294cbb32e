#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "quadrature.hpp"

namespace boltz1d {

// b(mu) = sum_k coeffs[k] mu^k on [-1, 1]
struct AngularFactor {
  std::vector<double> coeffs{1.0};
  double min_value = 1.0;
  double max_value = 1.0;
  double integral = 2.0;  // int_{-1}^{1} b(mu) dmu

  double operator()(double mu) const {
    double s = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) s = s * mu + *it;
    return s;
  }

  static AngularFactor constant(double c = 1.0) { return polynomial({c}); }

  static AngularFactor polynomial(std::vector<double> c) {
    if (c.empty()) throw Error("angular factor needs at least one coefficient");
    AngularFactor b;
    b.coeffs = std::move(c);
    b.integral = 0.0;
    for (std::size_t k = 0; k < b.coeffs.size(); k += 2) b.integral += 2.0 * b.coeffs[k] / double(k + 1);
    // dense sample, then golden-section polish around the extreme samples
    const int n = 4001;
    double lo = b(-1.0), hi = lo;
    int ilo = 0, ihi = 0;
    for (int i = 0; i < n; ++i) {
      const double mu = -1.0 + 2.0 * i / (n - 1);
      const double v = b(mu);
      if (v < lo) lo = v, ilo = i;
      if (v > hi) hi = v, ihi = i;
    }
    auto polish = [&](int i, double sign) {
      double a = std::max(-1.0, -1.0 + 2.0 * (i - 1) / (n - 1));
      double d = std::min(1.0, -1.0 + 2.0 * (i + 1) / (n - 1));
      const double g = 0.6180339887498949;
      for (int it = 0; it < 200 && d - a > 1e-15; ++it) {
        const double m1 = d - g * (d - a), m2 = a + g * (d - a);
        if (sign * b(m1) > sign * b(m2)) d = m2; else a = m1;
      }
      return b(0.5 * (a + d));
    };
    b.max_value = std::max(hi, polish(ihi, 1.0));
    b.min_value = std::min(lo, polish(ilo, -1.0));
    return b;
  }

  std::string describe() const {
    if (coeffs.size() == 1) return coeffs[0] == 1.0 ? "constant" : "constant:" + std::to_string(coeffs[0]);
    std::ostringstream os;
    os.precision(17);
    os << "poly:";
    for (std::size_t k = 0; k < coeffs.size(); ++k) os << (k ? "," : "") << coeffs[k];
    return os.str();
  }
};

// B(r, mu) with cutoff metadata. Separable kernels carry radial(r) * b(mu);
// general kernels carry an arbitrary map and get their delta estimated.
struct CollisionKernel {
  std::string kind = "zero";
  double R0 = 0.0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double sup_bound = 0.0;
  double envelope_l1 = 0.0;
  std::function<double(double)> radial;
  std::optional<AngularFactor> angular;
  std::function<double(double, double)> general;
  std::function<double(double)> envelope;
  std::string description;

  bool separable() const { return angular.has_value(); }

  double radial_part(double r) const { return r <= R0 || r <= 0.0 ? 0.0 : radial(r); }

  double eval(double r, double mu) const {
    if (r <= R0 || r <= 0.0) return 0.0;
    return separable() ? radial(r) * (*angular)(mu) : general(r, mu);
  }

  double phi(double r) const { return envelope ? envelope(r) : 0.0; }
};

namespace detail {

// sup over r > R0 of g(r), log-spaced sample then golden polish
inline double sup_over_r(const std::function<double(double)>& g, double r_lo, double r_hi) {
  const int n = 4000;
  const double a = std::log(r_lo), b = std::log(r_hi);
  double best = 0.0;
  int ibest = 0;
  for (int i = 0; i < n; ++i) {
    const double v = g(std::exp(a + (b - a) * i / (n - 1)));
    if (v > best) best = v, ibest = i;
  }
  double lo = a + (b - a) * std::max(0, ibest - 1) / (n - 1);
  double hi = a + (b - a) * std::min(n - 1, ibest + 1) / (n - 1);
  const double gr = 0.6180339887498949;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
    if (g(std::exp(m1)) > g(std::exp(m2))) hi = m2; else lo = m1;
  }
  return std::max(best, g(std::exp(0.5 * (lo + hi))));
}

}  // namespace detail

inline CollisionKernel zero_kernel() {
  CollisionKernel k;
  k.kind = "zero";
  k.radial = [](double) { return 0.0; };
  k.angular = AngularFactor::constant();
  k.envelope = [](double) { return 0.0; };
  k.description = "zero kernel";
  return k;
}

inline CollisionKernel canonical_kernel(double C, double eps, double R0, const AngularFactor& b = AngularFactor::constant()) {
  if (!(C > 0.0)) throw Error("kernel.C must be positive");
  if (!(eps > 0.0)) throw Error("kernel.eps must be positive");
  if (!(R0 > 0.0)) throw Error("kernel.R0 must be positive");
  if (!(b.min_value > 0.0)) throw Error("angular factor must be bounded below by a positive constant on [-1,1]");
  CollisionKernel k;
  k.kind = "canonical";
  k.R0 = R0;
  k.angular = b;
  k.radial = [C, eps](double r) { return C * r / (1.0 + r * std::pow(std::log1p(r), 1.0 + eps)); };
  const double bmax = b.max_value;
  auto env = [C, eps, R0, bmax](double r) {
    const double s = std::max(r, R0);
    return C * bmax / (1.0 + s * std::pow(std::log1p(s), 1.0 + eps));
  };
  k.envelope = env;
  k.delta = 2.0 * pi * b.integral / bmax;

  // ||phi||_L1 = R0 phi(R0) + C bmax int_{R0}^inf dr / (1 + r log^{1+eps}(1+r)), with u = log(1+r)
  const double u0 = std::log1p(R0), U = 40.0;
  auto integrand = [eps](double u) {
    const double e = std::exp(u);
    return e / (1.0 + (e - 1.0) * std::pow(u, 1.0 + eps));
  };
  double body = 0.0;
  if (u0 < U) {
    const Rule1D gl = gauss_legendre(12);
    const int panels = 2000;
    for (int p = 0; p < panels; ++p) {
      const double a = u0 + (U - u0) * p / panels, c = u0 + (U - u0) * (p + 1) / panels;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        body += 0.5 * (c - a) * gl.weights[i] * integrand(0.5 * (a + c) + 0.5 * (c - a) * gl.nodes[i]);
    }
  }
  const double tail = std::pow(std::max(U, u0), -eps) / eps / (1.0 - std::exp(-std::max(U, u0)));
  k.envelope_l1 = R0 * env(R0) + C * bmax * (body + tail);

  auto weighted = [C, eps](double r) { return C * (1.0 + r) / (1.0 + r * std::pow(std::log1p(r), 1.0 + eps)); };
  k.sup_bound = bmax * detail::sup_over_r(weighted, R0 * (1.0 + 1e-15), 1e8);
  std::ostringstream os;
  os.precision(17);
  os << "canonical C=" << C << " eps=" << eps << " R0=" << R0 << " b=" << b.describe();
  k.description = os.str();
  return k;
}

// radial table (r, value) with linear interpolation, zero beyond the last node
inline CollisionKernel table_kernel(std::vector<std::pair<double, double>> table, double R0,
                                    const AngularFactor& b = AngularFactor::constant()) {
  if (table.size() < 2) throw Error("kernel table needs at least two rows");
  if (!(R0 > 0.0)) throw Error("kernel.R0 must be positive");
  if (!(b.min_value > 0.0)) throw Error("angular factor must be bounded below by a positive constant on [-1,1]");
  std::sort(table.begin(), table.end());
  for (const auto& [r, v] : table)
    if (!(r >= 0.0) || !(v >= 0.0) || !std::isfinite(v)) throw Error("kernel table rows must be finite and nonnegative");
  CollisionKernel k;
  k.kind = "custom-table";
  k.R0 = R0;
  k.angular = b;
  auto radial = [table](double r) {
    if (r < table.front().first || r > table.back().first) return 0.0;
    auto it = std::upper_bound(table.begin(), table.end(), std::make_pair(r, std::numeric_limits<double>::infinity()));
    if (it == table.end()) return table.back().second;
    auto jt = std::prev(it);
    const double w = (r - jt->first) / (it->first - jt->first);
    return (1.0 - w) * jt->second + w * it->second;
  };
  k.radial = radial;
  const double bmax = b.max_value;
  // phi(r) = bmax * sup_{s >= max(r,R0)} radial(s)/s; Phi/s is monotone on each linear piece
  std::vector<double> knots{R0};
  for (const auto& row : table)
    if (row.first > R0) knots.push_back(row.first);
  std::vector<double> suffix(knots.size());
  double run = 0.0;
  for (std::size_t i = knots.size(); i-- > 0;) {
    run = std::max(run, radial(knots[i]) / knots[i]);
    suffix[i] = run;
  }
  auto env = [knots, suffix, radial, bmax, R0](double r) {
    const double s = std::max(r, R0);
    auto it = std::lower_bound(knots.begin(), knots.end(), s);
    const double after = it == knots.end() ? 0.0 : suffix[std::size_t(it - knots.begin())];
    return bmax * std::max(after, radial(s) / s);
  };
  k.envelope = env;
  // left Riemann sums of a non-increasing function overestimate the integral
  double l1 = R0 * env(R0);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const int sub = 256;
    for (int j = 0; j < sub; ++j) {
      const double a = knots[i] + (knots[i + 1] - knots[i]) * j / sub;
      l1 += env(a) * (knots[i + 1] - knots[i]) / sub;
    }
  }
  k.envelope_l1 = l1;
  double sup = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    for (int j = 0; j <= 256; ++j) {
      const double r = knots[i] + (knots[i + 1] - knots[i]) * j / 256.0;
      if (r > R0) sup = std::max(sup, (1.0 + 1.0 / r) * radial(r));
    }
  k.sup_bound = bmax * sup;
  double bint = b.integral;
  k.delta = 2.0 * pi * bint / bmax;
  k.description = "custom-table rows=" + std::to_string(table.size()) + " R0=" + std::to_string(R0) + " b=" + b.describe();
  return k;
}

inline std::vector<std::pair<double, double>> read_kernel_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open kernel table " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    double r, v;
    if (is >> r >> v) rows.emplace_back(r, v);
  }
  return rows;
}

// total cross-section 2 pi int B(r, cos th) sin th dth by Gauss-Legendre in mu
inline double total_cross_section(const CollisionKernel& k, double r, int n_mu = 16) {
  if (r <= k.R0 || r <= 0.0) return 0.0;
  const Rule1D gl = gauss_legendre(n_mu);
  double s = 0.0;
  for (int i = 0; i < n_mu; ++i) s += gl.weights[i] * k.eval(r, gl.nodes[i]);
  return 2.0 * pi * s;
}

inline std::vector<double> chebyshev_mu(int n) {
  std::vector<double> mu(n);
  for (int i = 0; i < n; ++i) mu[i] = std::cos(pi * (i + 0.5) / n);
  return mu;
}

inline double sup_over_angle(const CollisionKernel& k, double r) {
  if (r <= k.R0 || r <= 0.0) return 0.0;
  if (k.separable()) return k.radial(r) * k.angular->max_value;
  double best = std::max(k.eval(r, -1.0), k.eval(r, 1.0));
  for (double mu : chebyshev_mu(64)) best = std::max(best, k.eval(r, mu));
  return best;
}

struct ValidationSample {
  std::vector<double> r;
  std::vector<double> mu;
  std::string description;
};

inline ValidationSample default_validation_sample(const CollisionKernel& k) {
  ValidationSample s;
  const double lo = k.R0 > 0.0 ? k.R0 / 2.0 : 1e-3;
  const double hi = 100.0;
  s.r.push_back(0.0);
  for (int i = 0; i < 256; ++i) s.r.push_back(lo * std::pow(hi / lo, i / 255.0));
  s.mu = chebyshev_mu(64);
  std::ostringstream os;
  os << "r: 0 plus 256 log-spaced points on [" << lo << ", " << hi << "]; mu: 64 Chebyshev points";
  s.description = os.str();
  return s;
}

struct ViolationPoint {
  double r = 0.0;
  double mu = 0.0;
  double margin = std::numeric_limits<double>::infinity();
};

struct KernelValidationReport {
  bool h1_holds = true;
  bool h2_holds = true;
  std::optional<double> estimated_delta;  // empty when no sampled r carries mass
  ViolationPoint worst_violation;
  std::string sample_description;
  std::vector<std::string> notes;
};

inline KernelValidationReport validate_hypotheses(const CollisionKernel& k, const ValidationSample& sample) {
  if (sample.r.empty() || sample.mu.empty()) throw Error("validation sample is empty");
  KernelValidationReport rep;
  rep.sample_description = sample.description;
  auto record = [&](double r, double mu, double margin) {
    if (margin < rep.worst_violation.margin) rep.worst_violation = {r, mu, margin};
  };
  const double rel = 1e-12;
  for (double r : sample.r) {
    const double phi_r = k.phi(r) * r;
    const bool beyond = r > k.R0;
    for (double mu : sample.mu) {
      const double b = k.eval(r, mu);
      if (!(b >= 0.0) || !std::isfinite(b)) {
        rep.h1_holds = false;
        record(r, mu, -std::numeric_limits<double>::infinity());
        continue;
      }
      if (r > 0.0) {
        const double m1 = phi_r * (1.0 + rel) - b;
        const double m2 = k.sup_bound * (1.0 + rel) - (1.0 + 1.0 / r) * b;
        if (m1 < 0.0 || m2 < 0.0) rep.h1_holds = false;
        record(r, mu, std::min(m1, m2));
      }
      if (!beyond && b > 0.0) {
        rep.h2_holds = false;
        record(r, mu, -b);
      }
    }
    if (beyond) {
      const double sup = sup_over_angle(k, r);
      if (sup > 0.0) {
        const double ratio = total_cross_section(k, r) / sup;
        rep.estimated_delta = rep.estimated_delta ? std::min(*rep.estimated_delta, ratio) : ratio;
        if (std::isfinite(k.delta) && k.delta * sup > total_cross_section(k, r) * (1.0 + 1e-10)) {
          rep.h2_holds = false;
          record(r, 1.0, total_cross_section(k, r) - k.delta * sup);
        }
      }
    }
  }
  if (!(k.envelope_l1 < std::numeric_limits<double>::infinity())) {
    rep.h1_holds = false;
    rep.notes.push_back("envelope is not integrable");
  }
  if (!(k.R0 > 0.0) && k.kind != "zero") {
    bool any_mass = false;
    for (double r : sample.r)
      if (r > 0.0 && sup_over_angle(k, r) > 0.0) any_mass = true;
    if (any_mass) {
      rep.h2_holds = false;
      rep.notes.push_back("no positive low-speed cutoff radius");
      record(0.0, 1.0, -1.0);
    }
  }
  if (!rep.estimated_delta) rep.notes.push_back("estimated delta undefined: kernel vanishes on the sample");
  else if (!(*rep.estimated_delta > 0.0)) rep.h2_holds = false;
  return rep;
}

inline KernelValidationReport validate_hypotheses(const CollisionKernel& k) {
  return validate_hypotheses(k, default_validation_sample(k));
}

// general (possibly non-separable) kernel for tests and fixtures; delta is estimated, never assumed
inline CollisionKernel general_kernel(std::string name, std::function<double(double, double)> eval, double R0,
                                      std::function<double(double)> envelope, double envelope_l1, double sup_bound) {
  CollisionKernel k;
  k.kind = "custom";
  k.R0 = R0;
  k.general = std::move(eval);
  k.envelope = std::move(envelope);
  k.envelope_l1 = envelope_l1;
  k.sup_bound = sup_bound;
  k.description = std::move(name);
  const auto rep = validate_hypotheses(k);
  if (rep.estimated_delta) k.delta = *rep.estimated_delta;
  return k;
}

// separable fixture with user-supplied radial part
inline CollisionKernel separable_kernel(std::string name, std::function<double(double)> radial, double R0,
                                        const AngularFactor& b, std::function<double(double)> envelope,
                                        double envelope_l1, double sup_bound) {
  CollisionKernel k;
  k.kind = "custom";
  k.R0 = R0;
  k.radial = std::move(radial);
  k.angular = b;
  k.envelope = std::move(envelope);
  k.envelope_l1 = envelope_l1;
  k.sup_bound = sup_bound;
  k.delta = 2.0 * pi * b.integral / b.max_value;
  k.description = std::move(name);
  return k;
}

}  // namespace boltz1d
