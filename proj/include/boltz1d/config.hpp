#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "collision.hpp"
#include "diagnostics.hpp"
#include "inequality_lab.hpp"
#include "integrator.hpp"
#include "kernel.hpp"
#include "state.hpp"

namespace boltz1d {

struct ConfigError : Error {
  std::vector<std::string> problems;
  explicit ConfigError(std::vector<std::string> p) : Error(join(p)), problems(std::move(p)) {}

  static std::string join(const std::vector<std::string>& p) {
    std::string s = "invalid config:";
    for (const auto& e : p) s += "\n  " + e;
    return s;
  }
};

struct KernelConfig {
  std::string type = "canonical";  // canonical | custom-table | zero
  double C = 1.0;
  double eps = 1.0;
  double R0 = 0.5;
  std::string b = "constant";
  std::string table;  // path, relative to the config file

  AngularFactor angular() const {
    if (b == "constant") return AngularFactor::constant();
    const auto colon = b.find(':');
    if (colon == std::string::npos) throw Error("kernel.b must be constant, constant:<c> or poly:<c0,c1,...>");
    const std::string head = b.substr(0, colon);
    std::vector<double> c;
    std::stringstream ss(b.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      double v;
      const auto* first = item.data();
      while (*first == ' ') ++first;
      const auto res = std::from_chars(first, item.data() + item.size(), v);
      if (res.ec != std::errc() || res.ptr != item.data() + item.size()) throw Error("kernel.b: bad coefficient '" + item + "'");
      c.push_back(v);
    }
    if (head == "constant" && c.size() == 1) return AngularFactor::constant(c[0]);
    if (head == "poly" && !c.empty()) return AngularFactor::polynomial(c);
    throw Error("kernel.b must be constant, constant:<c> or poly:<c0,c1,...>");
  }

  CollisionKernel build(const std::filesystem::path& base = {}) const {
    if (type == "zero") return zero_kernel();
    if (type == "canonical") return canonical_kernel(C, eps, R0, angular());
    if (type == "custom-table") {
      std::filesystem::path p(table);
      if (p.is_relative() && !base.empty()) p = base / p;
      return table_kernel(read_kernel_table(p.string()), R0, angular());
    }
    throw Error("kernel.type must be canonical, custom-table or zero");
  }
};

struct InitialConfig {
  std::string datum = "near-maxwellian";  // near-maxwellian | beams | gaussian-bump | maxwellian
  double mass = 1.0;
  double temperature = 1.0;
  double rho_amp = 0.1;
  double temp_amp = 0.05;
  double beam_speed = 1.2;
  double contrast = 0.8;
  double width = 0.6;
  double center = 0.0;
};

struct DiagnosticsConfig {
  double q_max = 0.0;  // 0: grid default
  int n_q = 256;
  std::string reference = "auto";  // auto | none | m,u1,u2,u3,T
  bool entropy_production = true;
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
  bool svg = true;
  bool snapshots = false;
};

struct ExperimentConfig {
  std::string scenario = "near-maxwellian-torus";
  unsigned long long seed = 0;
  PhaseGrid grid;
  KernelConfig kernel;
  int n_polar = 8;
  int n_azimuth = 6;
  Interpolation interpolation = Interpolation::trilinear;
  IntegratorConfig integrator;
  InitialConfig initial;
  DiagnosticsConfig diagnostics;
  OutputConfig output;
  std::filesystem::path base_dir;
  std::string source_text;
  std::vector<std::string> warnings;
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"near-maxwellian-torus", "large-data-torus", "line-dissipation"};
  return names;
}

inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.scenario = name;
  c.kernel = KernelConfig{};
  if (name == "near-maxwellian-torus") {
    c.grid = PhaseGrid{DomainKind::torus, 1.0, 8, 6.0, 10};
    c.initial.datum = "near-maxwellian";
    c.integrator.dt = 0.01;
    c.integrator.t_end = 1.0;
    c.integrator.snapshot_stride = 10;
  } else if (name == "large-data-torus") {
    c.grid = PhaseGrid{DomainKind::torus, 1.0, 8, 5.5, 10};
    c.initial.datum = "beams";
    c.initial.temperature = 0.5;
    c.integrator.dt = 0.01;
    c.integrator.t_end = 5.0;
    c.integrator.snapshot_stride = 25;
  } else if (name == "line-dissipation") {
    c.grid = PhaseGrid{DomainKind::line, 4.0, 16, 4.5, 8};
    c.initial.datum = "gaussian-bump";
    c.initial.temperature = 0.5;
    c.integrator.dt = 0.05;
    c.integrator.t_end = 20.0;
    c.integrator.snapshot_stride = 20;
  } else {
    throw Error("unknown scenario '" + name + "'");
  }
  return c;
}

namespace detail {

inline std::optional<double> to_double(const std::string& s) {
  double v;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> to_int(const std::string& s) {
  long long v;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<bool> to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  return std::nullopt;
}

inline std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r\"");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\"");
  return s.substr(a, b - a + 1);
}

// setter returns an error message, empty on success
using Setter = std::function<std::string(ExperimentConfig&, const std::string&)>;

template <class F>
Setter real_key(F field) {
  return [field](ExperimentConfig& c, const std::string& v) -> std::string {
    const auto d = to_double(v);
    if (!d || !std::isfinite(*d)) return "expected a real number, got '" + v + "'";
    field(c) = *d;
    return {};
  };
}

template <class F>
Setter int_key(F field) {
  return [field](ExperimentConfig& c, const std::string& v) -> std::string {
    const auto d = to_int(v);
    if (!d) return "expected an integer, got '" + v + "'";
    field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(*d);
    return {};
  };
}

template <class F>
Setter bool_key(F field) {
  return [field](ExperimentConfig& c, const std::string& v) -> std::string {
    const auto d = to_bool(v);
    if (!d) return "expected true or false, got '" + v + "'";
    field(c) = *d;
    return {};
  };
}

template <class F>
Setter string_key(F field) {
  return [field](ExperimentConfig& c, const std::string& v) -> std::string {
    field(c) = v;
    return {};
  };
}

inline const std::map<std::string, Setter>& config_schema() {
  using C = ExperimentConfig;
  static const std::map<std::string, Setter> schema{
      {"run.seed", int_key([](C& c) -> unsigned long long& { return c.seed; })},
      {"grid.domain",
       [](C& c, const std::string& v) -> std::string {
         if (v == "torus") c.grid.kind = DomainKind::torus;
         else if (v == "line") c.grid.kind = DomainKind::line;
         else return "expected torus or line, got '" + v + "'";
         return {};
       }},
      {"grid.L", real_key([](C& c) -> double& { return c.grid.L; })},
      {"grid.Nx", int_key([](C& c) -> int& { return c.grid.Nx; })},
      {"grid.Vmax", real_key([](C& c) -> double& { return c.grid.Vmax; })},
      {"grid.Nv", int_key([](C& c) -> int& { return c.grid.Nv; })},
      {"kernel.type", string_key([](C& c) -> std::string& { return c.kernel.type; })},
      {"kernel.C", real_key([](C& c) -> double& { return c.kernel.C; })},
      {"kernel.eps", real_key([](C& c) -> double& { return c.kernel.eps; })},
      {"kernel.R0", real_key([](C& c) -> double& { return c.kernel.R0; })},
      {"kernel.b", string_key([](C& c) -> std::string& { return c.kernel.b; })},
      {"kernel.table", string_key([](C& c) -> std::string& { return c.kernel.table; })},
      {"collision.n_polar", int_key([](C& c) -> int& { return c.n_polar; })},
      {"collision.n_azimuth", int_key([](C& c) -> int& { return c.n_azimuth; })},
      {"collision.interpolation",
       [](C& c, const std::string& v) -> std::string {
         if (v == "linear") c.interpolation = Interpolation::trilinear;
         else if (v == "log") c.interpolation = Interpolation::log_trilinear;
         else return "expected linear or log, got '" + v + "'";
         return {};
       }},
      {"integrator.scheme",
       [](C& c, const std::string& v) -> std::string {
         if (v == "strang") c.integrator.scheme = Scheme::strang;
         else if (v == "lie") c.integrator.scheme = Scheme::lie;
         else if (v == "picard") c.integrator.scheme = Scheme::picard;
         else return "expected strang, lie or picard, got '" + v + "'";
         return {};
       }},
      {"integrator.dt", real_key([](C& c) -> double& { return c.integrator.dt; })},
      {"integrator.t_end", real_key([](C& c) -> double& { return c.integrator.t_end; })},
      {"integrator.snapshot_stride", int_key([](C& c) -> int& { return c.integrator.snapshot_stride; })},
      {"integrator.picard_tol", real_key([](C& c) -> double& { return c.integrator.picard_tol; })},
      {"integrator.picard_max_iter", int_key([](C& c) -> int& { return c.integrator.picard_max_iter; })},
      {"integrator.dt_min", real_key([](C& c) -> double& { return c.integrator.dt_min; })},
      {"initial.datum", string_key([](C& c) -> std::string& { return c.initial.datum; })},
      {"initial.mass", real_key([](C& c) -> double& { return c.initial.mass; })},
      {"initial.temperature", real_key([](C& c) -> double& { return c.initial.temperature; })},
      {"initial.rho_amp", real_key([](C& c) -> double& { return c.initial.rho_amp; })},
      {"initial.temp_amp", real_key([](C& c) -> double& { return c.initial.temp_amp; })},
      {"initial.beam_speed", real_key([](C& c) -> double& { return c.initial.beam_speed; })},
      {"initial.contrast", real_key([](C& c) -> double& { return c.initial.contrast; })},
      {"initial.width", real_key([](C& c) -> double& { return c.initial.width; })},
      {"initial.center", real_key([](C& c) -> double& { return c.initial.center; })},
      {"diagnostics.q_max", real_key([](C& c) -> double& { return c.diagnostics.q_max; })},
      {"diagnostics.n_q", int_key([](C& c) -> int& { return c.diagnostics.n_q; })},
      {"diagnostics.reference", string_key([](C& c) -> std::string& { return c.diagnostics.reference; })},
      {"diagnostics.entropy_production", bool_key([](C& c) -> bool& { return c.diagnostics.entropy_production; })},
      {"output.directory", string_key([](C& c) -> std::string& { return c.output.directory; })},
      {"output.csv", bool_key([](C& c) -> bool& { return c.output.csv; })},
      {"output.json", bool_key([](C& c) -> bool& { return c.output.json; })},
      {"output.svg", bool_key([](C& c) -> bool& { return c.output.svg; })},
      {"output.snapshots", bool_key([](C& c) -> bool& { return c.output.snapshots; })},
  };
  return schema;
}

inline std::vector<double> split_reals(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = to_double(trim(item));
    if (!v) throw Error("bad number '" + item + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace detail

// the largest bulk speed and temperature the datum uses, for the velocity box check
inline std::pair<double, double> datum_extent(const InitialConfig& in) {
  if (in.datum == "near-maxwellian") return {0.0, in.temperature * (1.0 + std::abs(in.temp_amp))};
  if (in.datum == "beams") return {std::abs(in.beam_speed), in.temperature};
  return {0.0, in.temperature};
}

inline std::optional<MaxwellianSpec> parse_reference(const std::string& s) {
  if (s == "auto" || s == "none") return std::nullopt;
  const auto v = detail::split_reals(s);
  if (v.size() != 5) throw Error("diagnostics.reference must be auto, none or m,u1,u2,u3,T");
  return MaxwellianSpec{v[0], {v[1], v[2], v[3]}, v[4]};
}

inline std::vector<std::string> validate(ExperimentConfig& c) {
  std::vector<std::string> p;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) p.push_back(msg);
  };
  try {
    c.grid.validate();
  } catch (const Error& e) {
    p.push_back(std::string("grid: ") + e.what());
  }
  const auto& k = c.kernel;
  check(k.type == "canonical" || k.type == "custom-table" || k.type == "zero",
        "kernel.type: expected canonical, custom-table or zero, got '" + k.type + "'");
  if (k.type == "canonical") {
    check(k.C > 0.0, "kernel.C: must be positive");
    check(k.eps > 0.0, "kernel.eps: must be positive");
  }
  if (k.type != "zero") check(k.R0 > 0.0, "kernel.R0: must be positive");
  if (k.type == "custom-table") check(!k.table.empty(), "kernel.table: required for custom-table kernels");
  if (k.type != "zero") {
    try {
      if (!(k.angular().min_value > 0.0)) p.push_back("kernel.b: angular factor must stay positive on [-1, 1]");
    } catch (const Error& e) {
      p.push_back(e.what());
    }
  }
  check(c.n_polar >= 1, "collision.n_polar: must be at least 1");
  check(c.n_azimuth >= 1, "collision.n_azimuth: must be at least 1");
  const auto& it = c.integrator;
  check(it.dt > 0.0, "integrator.dt: must be positive");
  check(it.t_end >= 0.0, "integrator.t_end: must be nonnegative");
  check(it.snapshot_stride >= 1, "integrator.snapshot_stride: must be at least 1");
  check(it.picard_tol > 0.0, "integrator.picard_tol: must be positive");
  check(it.picard_max_iter >= 1, "integrator.picard_max_iter: must be at least 1");
  check(it.dt_min > 0.0, "integrator.dt_min: must be positive");
  if (it.dt > 0.0 && it.t_end > 0.0) {
    const double n = it.t_end / it.dt;
    check(std::abs(n - std::round(n)) < 1e-9 * std::max(1.0, n), "integrator.t_end: must be a whole number of steps dt");
  }
  const auto& in = c.initial;
  check(in.datum == "near-maxwellian" || in.datum == "beams" || in.datum == "gaussian-bump" || in.datum == "maxwellian",
        "initial.datum: expected near-maxwellian, beams, gaussian-bump or maxwellian, got '" + in.datum + "'");
  check(in.mass > 0.0, "initial.mass: must be positive");
  check(in.temperature > 0.0, "initial.temperature: must be positive");
  check(std::abs(in.rho_amp) < 1.0, "initial.rho_amp: must lie in (-1, 1) so the density stays positive");
  check(std::abs(in.temp_amp) < 1.0, "initial.temp_amp: must lie in (-1, 1) so the temperature stays positive");
  check(in.contrast >= 0.0 && in.contrast < 1.0, "initial.contrast: must lie in [0, 1)");
  check(in.width > 0.0, "initial.width: must be positive");
  if (in.datum == "gaussian-bump" && c.grid.kind == DomainKind::line)
    check(std::abs(in.center) < c.grid.L, "initial.center: must lie inside the line");
  check(c.diagnostics.n_q >= 2, "diagnostics.n_q: must be at least 2");
  check(c.diagnostics.q_max >= 0.0, "diagnostics.q_max: must be nonnegative");
  try {
    const auto ref = parse_reference(c.diagnostics.reference);
    if (ref) check(ref->m > 0.0 && ref->T > 0.0, "diagnostics.reference: mass and temperature must be positive");
    if (ref) check(c.grid.kind == DomainKind::torus, "diagnostics.reference: the line loses mass through its ends, use auto or none");
  } catch (const Error& e) {
    p.push_back(e.what());
  }
  check(!c.output.directory.empty(), "output.directory: must not be empty");
  if (c.grid.Vmax > 0.0 && in.temperature > 0.0) {
    const auto [u, T] = datum_extent(in);
    const double need = 6.0 * std::sqrt(T) + u;
    if (c.grid.Vmax < 4.0 * std::sqrt(T) + u)
      p.push_back("grid.Vmax: " + std::to_string(c.grid.Vmax) + " cuts the datum inside four thermal widths (need " +
                  std::to_string(need) + ")");
    else if (c.grid.Vmax < need)
      c.warnings.push_back("grid.Vmax below 6 sqrt(T) + |u| = " + std::to_string(need) + "; velocity tails are truncated");
  }
  return p;
}

// Strict INI parse on top of the preset named by run.scenario (default near-maxwellian-torus).
// Every unknown key, bad value and failed check is reported together.
inline ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({"line " + std::to_string(e.line()) + ": " + e.message()});
  }
  // an empty [section] and a bare key look the same in the tree
  std::set<std::string> headers;
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      line = detail::trim(line);
      if (line.size() > 2 && line.front() == '[' && line.back() == ']') headers.insert(detail::trim(line.substr(1, line.size() - 2)));
    }
  }
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> problems;
  for (const auto& [section, body] : tree) {
    if (body.empty() && headers.count(section)) continue;
    if (body.empty()) {
      // key outside any section; dotted names are accepted
      entries.emplace_back(section, detail::trim(body.data()));
      continue;
    }
    for (const auto& [key, val] : body) entries.emplace_back(section + "." + key, detail::trim(val.data()));
  }
  std::string scenario = "near-maxwellian-torus";
  for (const auto& [k, v] : entries)
    if (k == "run.scenario") scenario = v;
  ExperimentConfig c;
  try {
    c = preset(scenario);
  } catch (const Error& e) {
    problems.push_back(std::string("run.scenario: ") + e.what());
    c = preset("near-maxwellian-torus");
  }
  const auto& schema = detail::config_schema();
  for (const auto& [k, v] : entries) {
    if (k == "run.scenario") continue;
    const auto it = schema.find(k);
    if (it == schema.end()) {
      problems.push_back(k + ": unknown key");
      continue;
    }
    const std::string err = it->second(c, v);
    if (!err.empty()) problems.push_back(k + ": " + err);
  }
  c.base_dir = base_dir;
  c.source_text = text;
  auto more = validate(c);
  problems.insert(problems.end(), more.begin(), more.end());
  if (!problems.empty()) throw ConfigError(problems);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

// ---------------------------------------------------------------- initial data

inline DistributionState make_initial(const ExperimentConfig& c) {
  const auto& g = c.grid;
  const auto& in = c.initial;
  const double L = g.length();
  DistributionState s(g);
  auto add = [&](const std::function<double(double)>& rho, const Vec3& u, const std::function<double(double)>& T) {
    for (int ix = 0; ix < g.Nx; ++ix) {
      const auto prof = unit_maxwellian(g, u, T(g.x(ix)));
      const double r = rho(g.x(ix));
      for (int iv = 0; iv < g.nv3(); ++iv) s.at(ix, iv) += r * prof[iv];
    }
  };
  const double k = 2.0 * pi / L;
  const double T0 = in.temperature;
  if (in.datum == "near-maxwellian") {
    add([&](double x) { return in.mass / L * (1.0 + in.rho_amp * std::cos(k * (x - g.x_min()))); }, {0, 0, 0},
        [&](double x) { return T0 * (1.0 + in.temp_amp * std::sin(k * (x - g.x_min()))); });
  } else if (in.datum == "beams") {
    for (double sgn : {1.0, -1.0})
      add([&](double x) { return 0.5 * in.mass / L * (1.0 + sgn * in.contrast * std::sin(k * (x - g.x_min()))); },
          {sgn * in.beam_speed, 0, 0}, [&](double) { return T0; });
  } else if (in.datum == "gaussian-bump") {
    double norm = 0.0;
    for (int ix = 0; ix < g.Nx; ++ix) norm += std::exp(-0.5 * std::pow((g.x(ix) - in.center) / in.width, 2)) * g.dx();
    add([&](double x) { return in.mass / norm * std::exp(-0.5 * std::pow((x - in.center) / in.width, 2)); }, {0, 0, 0},
        [&](double) { return T0; });
  } else if (in.datum == "maxwellian") {
    s = maxwellian_state({in.mass, {0, 0, 0}, T0}, g);
  } else {
    throw Error("unknown initial datum '" + in.datum + "'");
  }
  // Gaussian tail outside the box, per axis: P(|v_i - u_i| > Vmax - |u_i|) with a one-sided shift on v1
  const auto [u, T] = datum_extent(in);
  const double sd = std::sqrt(T);
  const double p1 = 0.5 * (std::erfc((g.Vmax - u) / (sd * std::sqrt(2.0))) + std::erfc((g.Vmax + u) / (sd * std::sqrt(2.0))));
  const double p23 = std::erfc(g.Vmax / (sd * std::sqrt(2.0)));
  s.meta.velocity_leakage = in.mass * (1.0 - (1.0 - p1) * (1.0 - p23) * (1.0 - p23));
  return s;
}

inline std::optional<MaxwellianSpec> reference_for(const ExperimentConfig& c, const DistributionState& f_in) {
  if (c.diagnostics.reference == "none") return std::nullopt;
  // outflow changes the mass on the line, so there is no fixed reference to compare with
  if (c.grid.kind == DomainKind::line) return std::nullopt;
  if (auto ref = parse_reference(c.diagnostics.reference)) return ref;
  // moment-matched global Maxwellian
  const auto mo = moments(f_in);
  const Vec3 u = (1.0 / mo.mass) * mo.momentum;
  const double T = std::max((mo.energy / mo.mass - dot(u, u)) / 3.0, 1e-300);  // energy is the full second moment
  return MaxwellianSpec{mo.mass, u, T};
}

// small-entropy admissibility of near-Maxwellian data: H(f_in|M) <= 1 / (4C + 2C^2 m)
struct Admissibility {
  double H_rel = 0.0;
  double threshold = 0.0;
  double C = 0.0;
  bool admissible = false;
};

inline Admissibility small_entropy_admissibility(const DistributionState& f_in, const CollisionKernel& k,
                                                 const MaxwellianSpec& ref) {
  Admissibility a;
  a.C = 2.0 * pi * k.sup_bound;
  a.H_rel = relative_entropy(f_in, ref);
  if (a.C > 0.0) a.threshold = small_entropy_constants(ref.m, a.C).threshold;
  else a.threshold = std::numeric_limits<double>::infinity();
  a.admissible = a.H_rel <= a.threshold;
  return a;
}

}  // namespace boltz1d
