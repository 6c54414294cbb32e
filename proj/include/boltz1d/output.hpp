#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "experiment.hpp"

namespace boltz1d {

inline constexpr const char* version = "0.1.0";

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// json cannot hold nan or inf
inline nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v > 0 ? "inf" : "-inf");
}

inline void write_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records) {
  os << csv_header() << "\n";
  for (const auto& r : records) os << csv_row(r) << "\n";
}

inline nlohmann::json to_json(const RunCheck& c) {
  return {{"name", c.name}, {"holds", c.holds}, {"lhs", num(c.lhs)}, {"rhs", num(c.rhs)}, {"t", num(c.t)},
          {"detail", c.detail}};
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  using nlohmann::json;
  return json{
      {"scenario", c.scenario},
      {"seed", c.seed},
      {"grid", {{"domain", to_string(c.grid.kind)}, {"L", c.grid.L}, {"Nx", c.grid.Nx}, {"Vmax", c.grid.Vmax}, {"Nv", c.grid.Nv}}},
      {"kernel", {{"type", c.kernel.type}, {"C", c.kernel.C}, {"eps", c.kernel.eps}, {"R0", c.kernel.R0}, {"b", c.kernel.b},
                  {"table", c.kernel.table}}},
      {"collision", {{"n_polar", c.n_polar}, {"n_azimuth", c.n_azimuth}, {"interpolation", to_string(c.interpolation)}}},
      {"integrator", {{"scheme", to_string(c.integrator.scheme)}, {"dt", c.integrator.dt}, {"t_end", c.integrator.t_end},
                      {"snapshot_stride", c.integrator.snapshot_stride}, {"picard_tol", c.integrator.picard_tol},
                      {"picard_max_iter", c.integrator.picard_max_iter}, {"dt_min", c.integrator.dt_min}}},
      {"initial", {{"datum", c.initial.datum}, {"mass", c.initial.mass}, {"temperature", c.initial.temperature},
                   {"rho_amp", c.initial.rho_amp}, {"temp_amp", c.initial.temp_amp}, {"beam_speed", c.initial.beam_speed},
                   {"contrast", c.initial.contrast}, {"width", c.initial.width}, {"center", c.initial.center}}},
      {"diagnostics", {{"q_max", c.diagnostics.q_max}, {"n_q", c.diagnostics.n_q}, {"reference", c.diagnostics.reference},
                       {"entropy_production", c.diagnostics.entropy_production}}},
      {"output", {{"directory", c.output.directory}, {"csv", c.output.csv}, {"json", c.output.json}, {"svg", c.output.svg},
                  {"snapshots", c.output.snapshots}}},
  };
}

inline nlohmann::json state_summary(const DistributionState& s) {
  const auto mo = moments(s);
  return {{"t", num(s.time)},
          {"mass", num(mo.mass)},
          {"momentum", {num(mo.momentum[0]), num(mo.momentum[1]), num(mo.momentum[2])}},
          {"energy", num(mo.energy)},
          {"outflow_mass", num(s.meta.outflow_mass)},
          {"values", s.values.size()}};
}

inline nlohmann::json manifest(const ExperimentResult& r) {
  using nlohmann::json;
  const auto& tr = r.trajectory;
  json m;
  m["program"] = "boltz1d";
  m["version"] = version;
  m["compiler"] = __VERSION__;
  m["cxx_standard"] = long(__cplusplus);
  m["config"] = config_json(r.config);
  m["config_text"] = r.config.source_text;
  m["seed"] = r.config.seed;
  m["kernel"] = {{"description", r.kernel.description}, {"delta", num(r.kernel.delta)},
                 {"sup_bound", num(r.kernel.sup_bound)}, {"envelope_l1", num(r.kernel.envelope_l1)},
                 {"bony_c", num(bony_c(r.kernel))}, {"bony_rate_constant", num(bony_rate_constant(r.kernel, r.config.grid))}};
  m["initial_state"] = state_summary(r.f_in);
  if (r.reference)
    m["reference"] = {{"m", r.reference->m}, {"u", {r.reference->u[0], r.reference->u[1], r.reference->u[2]}}, {"T", r.reference->T}};
  if (r.admissibility)
    m["small_entropy_admissibility"] = {{"H_rel", num(r.admissibility->H_rel)}, {"threshold", num(r.admissibility->threshold)},
                                        {"C", num(r.admissibility->C)}, {"admissible", r.admissibility->admissible}};
  m["leakage"] = {{"datum_velocity_tail", num(r.f_in.meta.velocity_leakage)},
                  {"collision_velocity_box", num(tr.leakage_total)},
                  {"line_outflow", num(tr.records.empty() ? 0.0 : tr.records.back().leak_x)}};
  m["clip_events"] = tr.clip_total;
  m["guard_halvings"] = tr.halvings;
  m["projection_max"] = num(tr.projection_max);
  m["records"] = tr.records.size();
  m["complete"] = tr.complete;
  if (!tr.error.empty()) m["error"] = tr.error;
  if (r.picard)
    m["picard"] = {{"iterations", r.picard->iterations}, {"contraction", num(r.picard->contraction)},
                   {"last_distance", num(r.picard->last_distance)}, {"converged", r.picard->converged}};
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  m["checks"] = checks;
  m["warnings"] = r.warnings;
  if (!tr.records.empty()) {
    json snaps = json::array();
    for (const auto& s : tr.snapshots) snaps.push_back(state_summary(s));
    m["snapshots"] = snaps;
  }
  m["ok"] = r.ok();
  m["wall_seconds"] = r.wall_seconds;
  return m;
}

// one polyline per diagnostic against t; nan samples break the line
inline std::string svg_plot(const std::string& title, const std::vector<double>& t, const std::vector<double>& y) {
  const double W = 640, H = 400, ml = 80, mr = 20, mt = 30, mb = 50;
  double tmin = 0, tmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(y[i])) continue;
    if (!any) tmin = tmax = t[i], ymin = ymax = y[i], any = true;
    tmin = std::min(tmin, t[i]), tmax = std::max(tmax, t[i]);
    ymin = std::min(ymin, y[i]), ymax = std::max(ymax, y[i]);
  }
  if (tmax == tmin) tmax = tmin + 1.0;
  if (ymax == ymin) {
    const double pad = ymin == 0.0 ? 1.0 : 0.5 * std::abs(ymin);
    ymin -= pad, ymax += pad;
  }
  auto X = [&](double v) { return ml + (W - ml - mr) * (v - tmin) / (tmax - tmin); };
  auto Y = [&](double v) { return H - mb - (H - mt - mb) * (v - ymin) / (ymax - ymin); };
  char buf[256];
  std::string s;
  std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n", W, H, W, H);
  s += buf;
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">%s</text>\n", ml, title.c_str());
  s += buf;
  std::snprintf(buf, sizeof buf, "<path d=\"M%g %g V%g H%g\" stroke=\"black\" fill=\"none\"/>\n", ml, double(mt), H - mb, W - mr);
  s += buf;
  auto label = [&](double x, double y, const char* anchor, double v) {
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"%s\">%.4g</text>\n",
                  x, y, anchor, v);
    s += buf;
  };
  label(ml - 5, Y(ymax) + 4, "end", ymax);
  label(ml - 5, Y(ymin) + 4, "end", ymin);
  label(X(tmin), H - mb + 16, "middle", tmin);
  label(X(tmax), H - mb + 16, "middle", tmax);
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t</text>\n",
                0.5 * (ml + W - mr), H - 12);
  s += buf;
  std::string d;
  bool pen = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(y[i])) {
      pen = false;
      continue;
    }
    std::snprintf(buf, sizeof buf, "%s%.2f %.2f ", pen ? "L" : "M", X(t[i]), Y(y[i]));
    d += buf;
    pen = true;
  }
  if (!d.empty()) s += "<path d=\"" + d + "\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" fill=\"none\"/>\n";
  s += "</svg>\n";
  return s;
}

inline std::vector<std::pair<std::string, std::vector<double>>> record_columns(const std::vector<DiagnosticsRecord>& rs) {
  std::vector<std::pair<std::string, std::vector<double>>> cols{
      {"mass", {}}, {"px", {}}, {"py", {}}, {"pz", {}}, {"energy", {}}, {"H", {}}, {"H_rel", {}}, {"D_H", {}},
      {"X", {}}, {"X_err", {}}, {"L", {}}, {"D_B", {}}, {"ell", {}}, {"A", {}}, {"rho_sq", {}}, {"leak_v", {}},
      {"leak_x", {}}, {"clip_count", {}}};
  for (const auto& r : rs) {
    const double v[] = {r.mass, r.momentum[0], r.momentum[1], r.momentum[2], r.energy, r.H, r.H_rel, r.D_H, r.X,
                        r.X_err, r.L, r.D_B, r.ell, r.A, r.rho_sq, r.leak_v, r.leak_x, double(r.clip_count)};
    for (std::size_t k = 0; k < cols.size(); ++k) cols[k].second.push_back(v[k]);
  }
  return cols;
}

// writes diagnostics.csv, manifest.json, plots/*.svg and snapshots/*.txt as configured; returns the paths written
inline std::vector<std::filesystem::path> emit_outputs(const ExperimentResult& r, std::filesystem::path dir = {}) {
  namespace fs = std::filesystem;
  if (dir.empty()) dir = r.config.output.directory;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
  std::vector<fs::path> written;
  auto open = [&](const fs::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot write " + p.string());
    written.push_back(p);
    return os;
  };
  const auto& tr = r.trajectory;
  if (r.config.output.csv && !tr.records.empty()) {
    auto os = open(dir / "diagnostics.csv");
    write_csv(os, tr.records);
  }
  if (r.config.output.svg && !tr.records.empty()) {
    fs::create_directories(dir / "plots");
    std::vector<double> t;
    for (const auto& rec : tr.records) t.push_back(rec.t);
    for (const auto& [name, y] : record_columns(tr.records)) {
      auto os = open(dir / "plots" / (name + ".svg"));
      os << svg_plot(name + " (" + r.config.scenario + ")", t, y);
    }
  }
  if (r.config.output.snapshots && !tr.snapshots.empty()) {
    fs::create_directories(dir / "snapshots");
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "state_%04zu.txt", i);
      auto os = open(dir / "snapshots" / name);
      write_snapshot(os, tr.snapshots[i]);
    }
  }
  // also written for an empty or partial trajectory
  if (r.config.output.json) {
    auto os = open(dir / "manifest.json");
    os << manifest(r).dump(2) << "\n";
  }
  return written;
}

}  // namespace boltz1d
