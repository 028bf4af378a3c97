#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cdf/commands.hpp"

using namespace cdf;
namespace fs = std::filesystem;

namespace {

const std::string kMinimalHeat = R"({"model": "heat", "params": {"c_v": 1, "lambda": 1, "alpha0": 0.1}})";

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cdf_lab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

int run_with(const std::string& command, const std::string& text, const fs::path& dir,
             bool override_audit = false) {
  CommandOptions opt;
  opt.out_dir = dir;
  opt.override_audit = override_audit;
  std::ostringstream err;
  return execute(command, text, opt, err);
}

std::string error_of(const std::string& command, const std::string& text) {
  try {
    (void)parse_config(text, command);
  } catch (const ConfigurationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ParseConfig, MinimalHeatRunFillsDefaults) {
  const RunConfig c = parse_config(kMinimalHeat, "run");
  EXPECT_EQ(c.command, "run");
  EXPECT_EQ(c.model, "heat");
  EXPECT_EQ(c.cfl, 0.45);
  EXPECT_EQ(c.grid.cells, 256);
  EXPECT_EQ(c.grid.x_min, 0.0);
  EXPECT_EQ(c.grid.x_max, 1.0);
  EXPECT_EQ(c.t_end, 1.0);
  EXPECT_EQ(c.output_every, c.t_end);
  EXPECT_EQ(c.seed, 20130917u);
  EXPECT_EQ(c.heat.space_dim, 1);
  EXPECT_EQ(c.boundary, BoundaryKind::periodic);
  EXPECT_EQ(c.initial.preset, "sine");
  EXPECT_EQ(c.audit.samples, 1000u);
}

TEST(ParseConfig, CflOutsideUnitIntervalRejected) {
  const std::string text = R"({"model": "heat", "cfl": 1.5, "params": {"c_v": 1, "lambda": 1, "alpha0": 0.1}})";
  EXPECT_NE(error_of("run", text).find("cfl ∈ (0,1)"), std::string::npos);
}

TEST(ParseConfig, MissingAlpha1NamesKey) {
  const std::string text =
      R"({"model": "fluid", "params": {"R": 1, "c_v": 1.5, "alpha0": 0.1, "lambda": 1, "kappa": 1}})";
  EXPECT_NE(error_of("run", text).find("params.alpha1"), std::string::npos);
}

TEST(ParseConfig, UnknownKeysRejected) {
  EXPECT_NE(error_of("run", R"({"model": "heat", "params": {"c_v": 1, "lambda": 1, "alpha0": 0.1}, "dt": 3})")
                .find("'dt'"),
            std::string::npos);
  EXPECT_NE(error_of("run", R"({"model": "heat", "params": {"c_v": 1, "lambda": 1, "alpha0": 0.1, "beta": 2}})")
                .find("params.beta"),
            std::string::npos);
}

TEST(ParseConfig, InvariantViolationsNameKey) {
  EXPECT_NE(error_of("run", R"({"model": "heat", "params": {"c_v": 1, "lambda": -1, "alpha0": 0.1}})").find("lambda"),
            std::string::npos);
  EXPECT_NE(error_of("run", R"({"model": "heat", "params": {"c_v": "x", "lambda": 1, "alpha0": 0.1}})").find("c_v"),
            std::string::npos);
  EXPECT_NE(error_of("run", R"({"model": "heat", "grid": {"cells": 2}, "params": {"c_v": 1, "lambda": 1, "alpha0": 1}})")
                .find("grid.cells"),
            std::string::npos);
  EXPECT_NE(error_of("run", "{not json").find("malformed"), std::string::npos);
  EXPECT_NE(error_of("run", R"({"command": "verify", "model": "heat", "params": {"c_v": 1, "lambda": 1, "alpha0": 1}})")
                .find("command"),
            std::string::npos);
  EXPECT_NE(error_of("powerlaw", R"({"powerlaw": {"mu0": 1, "alpha": 1.2}})").find("alpha"), std::string::npos);
}

TEST(ParseConfig, HashIgnoresFormatting) {
  const RunConfig a = parse_config(kMinimalHeat, "run");
  const RunConfig b = parse_config(R"({ "params": {"alpha0": 0.1, "lambda": 1, "c_v": 1},
                                        "model": "heat" })",
                                   "run");
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, parse_config(R"({"model": "heat", "params": {"c_v": 1, "lambda": 1, "alpha0": 0.2}})", "run").hash);
}

TEST(ParseConfig, SampleConfigsParse) {
  for (const auto& entry : fs::directory_iterator(CDF_CONFIG_DIR)) {
    EXPECT_NO_THROW((void)parse_config(read_file(entry.path()))) << entry.path();
  }
}

TEST(Threads, EnvironmentValue) {
  EXPECT_EQ(threads_from_env("3"), 3u);
  EXPECT_GE(threads_from_env(nullptr), 1u);
  EXPECT_THROW(threads_from_env("0"), ConfigurationError);
  EXPECT_THROW(threads_from_env("two"), ConfigurationError);
}

TEST(CmdVerify, HeatPassesAndWritesReport) {
  const fs::path dir = fresh_dir("verify_heat");
  EXPECT_EQ(run_with("verify", read_file(fs::path(CDF_CONFIG_DIR) / "heat_verify.json"), dir), 0);
  const auto doc = nlohmann::json::parse(read_file(dir / "audit.json"));
  EXPECT_TRUE(doc["passed"].get<bool>());
  EXPECT_EQ(doc["conditions"].size(), 6u);
  EXPECT_EQ(doc["seed"].get<std::uint64_t>(), 20130917u);
}

TEST(CmdVerify, FlippedFixtureFailsWithWitness) {
  const fs::path dir = fresh_dir("verify_flipped");
  EXPECT_EQ(run_with("verify", read_file(fs::path(CDF_CONFIG_DIR) / "flipped_entropy_verify.json"), dir), 1);
  const auto doc = nlohmann::json::parse(read_file(dir / "audit.json"));
  bool found = false;
  for (const auto& c : doc["conditions"]) {
    if (c["name"] == "concavity") {
      found = true;
      EXPECT_FALSE(c["passed"].get<bool>());
      EXPECT_EQ(c["witness"]["state"].size(), 2u);
    }
  }
  EXPECT_TRUE(found);
}

TEST(CmdVerify, DeterministicReports) {
  const std::string text = read_file(fs::path(CDF_CONFIG_DIR) / "fluid_verify.json");
  const fs::path a = fresh_dir("verify_a"), b = fresh_dir("verify_b");
  EXPECT_EQ(run_with("verify", text, a), 0);
  EXPECT_EQ(run_with("verify", text, b), 0);
  EXPECT_EQ(read_file(a / "audit.json"), read_file(b / "audit.json"));
}

TEST(CmdRun, HeatSineWritesArtifactsAndPasses) {
  const fs::path dir = fresh_dir("run_heat");
  EXPECT_EQ(run_with("run", read_file(fs::path(CDF_CONFIG_DIR) / "heat_sine_run.json"), dir), 0);
  ASSERT_TRUE(fs::exists(dir / "snapshot_0000.csv"));
  ASSERT_TRUE(fs::exists(dir / "snapshot_0005.csv"));
  EXPECT_FALSE(fs::exists(dir / "snapshot_0006.csv"));
  ASSERT_TRUE(fs::exists(dir / "diagnostics.jsonl"));
  const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  EXPECT_TRUE(summary["passed"].get<bool>());
  std::ifstream csv(dir / "snapshot_0000.csv");
  std::string meta, header, row;
  std::getline(csv, meta);
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(meta.rfind("# cdf-lab config_hash=", 0), 0u);
  EXPECT_EQ(header, "x,u,w,theta,q,sigma");
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 5);
}

TEST(CmdRun, BitIdenticalAcrossRepeatedRuns) {
  const std::string text = read_file(fs::path(CDF_CONFIG_DIR) / "fluid_pulse_run.json");
  const fs::path a = fresh_dir("run_a"), b = fresh_dir("run_b");
  EXPECT_EQ(run_with("run", text, a), 0);
  EXPECT_EQ(run_with("run", text, b), 0);
  for (const auto& entry : fs::directory_iterator(a)) {
    EXPECT_EQ(read_file(entry.path()), read_file(b / entry.path().filename())) << entry.path().filename();
  }
}

TEST(CmdRun, InadmissibleInitialDataIsAConfigurationError) {
  const std::string text = R"({"model": "heat", "params": {"c_v": 1, "lambda": 1, "alpha0": 0.1},
                               "initial": {"preset": "sine", "amplitude": 1.5}, "t_end": 0.1})";
  const fs::path dir = fresh_dir("run_bad");
  EXPECT_EQ(run_with("run", text, dir), 2);
  EXPECT_FALSE(fs::exists(dir / "snapshot_0000.csv"));
}

TEST(CmdRun, AuditFailingModelNeedsOverride) {
  const std::string text = R"({"model": "fixture:zero-dissipation", "params": {"c_v": 1, "lambda": 1, "alpha0": 0.1},
                               "t_end": 0.05, "grid": {"cells": 32}})";
  EXPECT_EQ(run_with("run", text, fresh_dir("run_gate")), 1);
  EXPECT_EQ(run_with("run", text, fresh_dir("run_gate_override"), true), 0);
}

TEST(CmdRun, FixedStateRiemannRun) {
  const fs::path dir = fresh_dir("run_riemann");
  EXPECT_EQ(run_with("run", read_file(fs::path(CDF_CONFIG_DIR) / "fluid_riemann_run.json"), dir), 0);
  std::ifstream csv(dir / "snapshot_0001.csv");
  std::string meta, header;
  std::getline(csv, meta);
  std::getline(csv, header);
  EXPECT_EQ(header, "x,rho,mom,erg,rho_w,rho_C,theta,q,tau,sigma");
}

TEST(CmdRun, TwoDimensionalHeat) {
  const fs::path dir = fresh_dir("run_2d");
  EXPECT_EQ(run_with("run", read_file(fs::path(CDF_CONFIG_DIR) / "heat_2d_run.json"), dir), 0);
  std::ifstream csv(dir / "snapshot_0000.csv");
  std::string meta, header;
  std::getline(csv, meta);
  std::getline(csv, header);
  EXPECT_EQ(header, "x,y,u,w_x,w_y,theta,q_x,q_y,sigma");
}

TEST(CmdConverge, HeatStudyWithinBand) {
  const std::string text = R"({"model": "heat", "params": {"c_v": 1, "lambda": 1, "alpha0": 0.1},
    "study": {"alpha_values": [0.1, 0.03, 0.01, 0.003], "cells": 128}})";
  const fs::path dir = fresh_dir("converge_heat");
  EXPECT_EQ(run_with("converge", text, dir), 0);
  std::ifstream csv(dir / "study.csv");
  std::string meta, header;
  std::getline(csv, meta);
  std::getline(csv, header);
  EXPECT_EQ(header, "alpha0,L1,L2,Linf");
  const auto summary = nlohmann::json::parse(read_file(dir / "study.json"));
  EXPECT_TRUE(summary["passed"].get<bool>());
}

TEST(CmdConverge, SlopeOutsideBandFails) {
  const std::string text = R"({"model": "heat", "params": {"c_v": 1, "lambda": 1, "alpha0": 0.1},
    "study": {"alpha_values": [0.1, 0.03, 0.01], "cells": 64, "slope_band": [3.0, 4.0]}})";
  EXPECT_EQ(run_with("converge", text, fresh_dir("converge_band")), 1);
}

TEST(CmdPowerlaw, SweepPassesAndRecoversIndex) {
  const fs::path dir = fresh_dir("powerlaw");
  EXPECT_EQ(run_with("powerlaw", read_file(fs::path(CDF_CONFIG_DIR) / "powerlaw.json"), dir), 0);
  const auto summary = nlohmann::json::parse(read_file(dir / "powerlaw.json"));
  EXPECT_NEAR(summary["fitted_slope"].get<double>(), 2.0, 1e-6);
  EXPECT_LE(summary["max_relative_gap"].get<double>(), 1e-8);
}

TEST(CmdPowerlaw, NewtonianGapIsZero) {
  const fs::path dir = fresh_dir("powerlaw_newtonian");
  EXPECT_EQ(run_with("powerlaw", R"({"powerlaw": {"mu0": 2, "alpha": 0}})", dir), 0);
  const auto summary = nlohmann::json::parse(read_file(dir / "powerlaw.json"));
  EXPECT_NEAR(summary["fitted_slope"].get<double>(), 1.0, 1e-12);
}

TEST(Binary, ExitStatusContract) {
  const fs::path out = fresh_dir("binary");
  const std::string bin = CDF_LAB_BINARY;
  const std::string cfg = std::string(CDF_CONFIG_DIR) + "/";
  auto status = [&](const std::string& args) {
    const int raw = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  EXPECT_EQ(status("verify --config " + cfg + "heat_verify.json --out " + (out / "v").string()), 0);
  EXPECT_EQ(status("verify --config " + cfg + "flipped_entropy_verify.json --out " + (out / "f").string()), 1);
  EXPECT_EQ(status("verify --config /nonexistent.json"), 2);
  EXPECT_EQ(status("run --config " + cfg + "heat_verify.json --out " + (out / "r").string()), 2);
  EXPECT_EQ(status("bogus --config x"), 2);
  EXPECT_EQ(status("powerlaw --config " + cfg + "powerlaw.json --out " + (out / "p").string()), 0);
  EXPECT_TRUE(fs::exists(out / "p" / "powerlaw.csv"));
  EXPECT_EQ(std::system(("CDF_LAB_THREADS=0 " + bin + " powerlaw --config " + cfg + "powerlaw.json --out " +
                         (out / "p").string() + " > /dev/null 2>&1")
                            .c_str()) >>
                8,
            2);
}
