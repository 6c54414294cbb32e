#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boltz1d/output.hpp>

using namespace boltz1d;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::filesystem::path src = BOLTZ1D_SOURCE_DIR;

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.problems;
  }
  return {};
}

}  // namespace

TEST(Config, EmptyTextGivesDefaultScenario) {
  const auto c = parse_config("");
  EXPECT_EQ(c.scenario, "near-maxwellian-torus");
  EXPECT_EQ(c.grid.Nv, 10);
  EXPECT_EQ(c.initial.datum, "near-maxwellian");
}

TEST(Config, NonPositiveDtNamesTheKey) {
  const auto p = problems_of("[integrator]\ndt = 0\n");
  ASSERT_FALSE(p.empty());
  EXPECT_NE(p.front().find("integrator.dt"), std::string::npos);
}

TEST(Config, UnknownKeyRejected) {
  const auto p = problems_of("[integrator]\npicard_tl = 1e-9\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_NE(p[0].find("integrator.picard_tl"), std::string::npos);
}

TEST(Config, AllProblemsCollected) {
  const auto p = problems_of("[grid]\nNv = 7\nNx = x\n[kernel]\ntype = soft\n");
  EXPECT_GE(p.size(), 3u);
}

TEST(Config, EmptySectionIsHarmless) {
  EXPECT_NO_THROW(parse_config("[output]\n[grid]\nNx = 4\n"));
}

TEST(Config, ScenarioThenOverrides) {
  const auto c = parse_config("[integrator]\nt_end = 0.5\n[run]\nscenario = line-dissipation\n");
  EXPECT_EQ(c.grid.kind, DomainKind::line);
  EXPECT_EQ(c.integrator.t_end, 0.5);
  EXPECT_EQ(c.integrator.dt, 0.05);
}

TEST(Config, UnknownScenario) {
  const auto p = problems_of("[run]\nscenario = nope\n");
  ASSERT_FALSE(p.empty());
  EXPECT_NE(p[0].find("run.scenario"), std::string::npos);
}

TEST(Config, VelocityBoxTooSmall) {
  EXPECT_FALSE(problems_of("[grid]\nVmax = 2\n").empty());
  const auto c = parse_config("[grid]\nVmax = 5\n");
  EXPECT_FALSE(c.warnings.empty());
}

TEST(Config, StepsMustDivideEndTime) {
  EXPECT_FALSE(problems_of("[integrator]\ndt = 0.03\nt_end = 1\n").empty());
}

TEST(Config, LargeDataPresetGolden) {
  const auto golden = nlohmann::json::parse(slurp(src / "tests/golden/large-data-torus.json"));
  EXPECT_EQ(config_json(preset("large-data-torus")), golden);
  EXPECT_EQ(config_json(parse_config("[run]\nscenario = large-data-torus\n")), golden);
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& name : preset_names()) {
    const auto c = load_config(src / "configs" / (name + ".ini"));
    auto got = config_json(c), want = config_json(preset(name));
    got["output"]["directory"] = want["output"]["directory"];
    EXPECT_EQ(got, want) << name;
    EXPECT_EQ(c.scenario, name);
  }
}

TEST(Config, CsvHeaderGolden) {
  std::ostringstream os;
  write_csv(os, {});
  EXPECT_EQ(os.str(), slurp(src / "tests/golden/diagnostics_header.csv"));
}

TEST(Config, KernelAngularFactors) {
  KernelConfig k;
  k.b = "poly:1,0,1";
  EXPECT_NEAR(k.angular().max_value, 2.0, 1e-12);
  k.b = "constant:2";
  EXPECT_EQ(k.angular().coeffs.front(), 2.0);
  EXPECT_FALSE(problems_of("[kernel]\nb = poly:0,1\n").empty());
}

TEST(Config, InitialDataHaveConfiguredMass) {
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    const auto f = make_initial(c);
    EXPECT_NEAR(moments(f).mass, c.initial.mass, 1e-12) << name;
  }
}

TEST(Config, RunIsDeterministic) {
  auto c = parse_config("[integrator]\nt_end = 0.04\nsnapshot_stride = 2\n[grid]\nNx = 4\nNv = 6\nVmax = 5\n"
                        "[collision]\nn_polar = 2\nn_azimuth = 2\n[diagnostics]\nentropy_production = false\n");
  const auto a = run_experiment(c), b = run_experiment(c);
  ASSERT_EQ(a.trajectory.records.size(), b.trajectory.records.size());
  std::ostringstream x, y;
  write_csv(x, a.trajectory.records);
  write_csv(y, b.trajectory.records);
  EXPECT_EQ(x.str(), y.str());
}

TEST(Config, ZeroEndTimeRun) {
  const auto r = run_experiment(parse_config("[integrator]\nt_end = 0\n[grid]\nNx = 4\nNv = 6\nVmax = 5\n"));
  EXPECT_TRUE(r.trajectory.complete);
  EXPECT_EQ(r.trajectory.records.size(), 1u);
}

TEST(Config, OutputsWritten) {
  auto c = parse_config("[integrator]\nt_end = 0.02\n[grid]\nNx = 4\nNv = 6\nVmax = 5\n"
                        "[collision]\nn_polar = 2\nn_azimuth = 2\n");
  const auto dir = std::filesystem::temp_directory_path() / "boltz1d_test_outputs";
  std::filesystem::remove_all(dir);
  const auto r = run_experiment(c);
  const auto files = emit_outputs(r, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "diagnostics.csv"));
  ASSERT_TRUE(std::filesystem::exists(dir / "manifest.json"));
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["records"].get<std::size_t>(), r.trajectory.records.size());
  EXPECT_EQ(m["config"]["scenario"], "near-maxwellian-torus");
  std::filesystem::remove_all(dir);
}

TEST(Config, LineRunSurvivesOutflow) {
  const auto r = run_experiment(parse_config(
      "[run]\nscenario = line-dissipation\n[grid]\nNx = 8\nNv = 6\n[initial]\ncenter = 3.5\n"
      "[integrator]\ndt = 0.05\nt_end = 0.5\nsnapshot_stride = 5\n"));
  ASSERT_TRUE(r.trajectory.complete) << r.trajectory.error;
  EXPECT_FALSE(r.reference.has_value());
  EXPECT_GT(r.trajectory.records.back().leak_x, 0.0);
  EXPECT_TRUE(std::isnan(r.trajectory.records.back().H_rel));
}

TEST(Config, ExplicitReferenceRejectedOnLine) {
  EXPECT_FALSE(problems_of("[run]\nscenario = line-dissipation\n[diagnostics]\nreference = 1,0,0,0,0.5\n").empty());
  EXPECT_TRUE(problems_of("[diagnostics]\nreference = 1,0,0,0,1\n").empty());
}

TEST(Config, AutoReferenceMatchesDatumTemperature) {
  auto c = parse_config("[integrator]\nt_end = 0\n");
  c.output.csv = c.output.json = c.output.svg = false;
  const auto r = run_experiment(c);
  ASSERT_TRUE(r.reference.has_value());
  EXPECT_NEAR(r.reference->T, 1.0, 1e-3);
  ASSERT_TRUE(r.admissibility.has_value());
  EXPECT_TRUE(r.admissibility->admissible);
}
