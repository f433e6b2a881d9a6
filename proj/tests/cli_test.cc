// Copyright 2026 The dpgame Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpg/errors.h"
#include "dpg_cli/commands.h"
#include "dpg_cli/config.h"
#include "dpg_cli/report_io.h"

namespace dpg::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dpg");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::path(::testing::TempDir()) / ("dpg_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

int lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

// Two users, short horizon: small enough to solve in a test and certified.
const char* kSmallMac =
    "scenario: mac\n"
    "seed: 7\n"
    "parameters: {num_users: 2, gains: [2.019, 1.002], horizon: 30, battery_max: 20}\n";

TEST(Cli, ListScenarios) {
  auto r = cli({"list-scenarios"});
  ASSERT_EQ(r.code, kExitOk);
  json j = json::parse(r.out);
  ASSERT_EQ(j.size(), 5u);
  EXPECT_EQ(j[2]["id"], "mac");
  EXPECT_EQ(j[2]["route"], "traj-opt");
  auto t = cli({"list-scenarios", "--format", "text"});
  EXPECT_NE(t.out.find("battery_max [double] = 33.0"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--format", "xml", "--scenario", "mac"}).code, kExitUsage);
  auto out = fresh_dir("usage");
  auto r = cli({"run", "--scenario", "nope", "--out", out.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_EQ(lines(r.err), 1);
  EXPECT_NE(r.err.find("unknown scenario 'nope'"), std::string::npos);
  json e = json::parse(slurp(out / "error.json"));
  EXPECT_EQ(e["exit_code"], 1);
  EXPECT_EQ(e["command"], "run");
}

TEST(Cli, InvalidParameterIsOneLineDiagnostic) {
  auto out = fresh_dir("invalid");
  write(out / "bad.yaml", "scenario: mac\nparameters: {num_users: 2.5}\n");
  auto r = cli({"check-potential", "--config", (out / "bad.yaml").string(), "--out",
                out.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_EQ(lines(r.err), 1);
  EXPECT_NE(r.err.find("num_users"), std::string::npos);
  write(out / "bad2.yaml", "scenario: mac\nsolver: {max_outer: 3}\n");
  EXPECT_EQ(cli({"run", "--config", (out / "bad2.yaml").string(), "--out", out.string()}).code,
            kExitUsage);
  EXPECT_EQ(cli({"run", "--config", (out / "missing.yaml").string(), "--out", out.string()}).code,
            kExitUsage);
}

TEST(Cli, CheckPotentialRoundTrips) {
  auto out = fresh_dir("potential");
  auto r = cli({"check-potential", "--scenario", "mac", "--out", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  json j = json::parse(slurp(out / "potential.json"));
  ConservativityReport rep = conservativity_from_json(j);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(make_report(rep).body, j);
  // A tolerance no finite-difference residual can meet.
  EXPECT_EQ(cli({"check-potential", "--scenario", "mac", "--tol", "1e-300", "--out",
                 out.string()})
                .code,
            kExitNotCertified);
}

TEST(Cli, RiccatiReportAndExitCodes) {
  auto out = fresh_dir("riccati");
  auto r = cli({"riccati", "--scenario", "smart-grid", "--out", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  json j = json::parse(slurp(out / "riccati.json"));
  RiccatiSolution sol = riccati_from_json(j);
  EXPECT_EQ(sol.P.rows(), 8);
  EXPECT_EQ(make_report(sol).body, j);
  EXPECT_EQ(cli({"riccati", "--scenario", "mac", "--out", out.string()}).code, kExitUsage);
  write(out / "short.yaml", "scenario: smart-grid\nriccati: {max_iter: 3}\n");
  auto nc = cli({"riccati", "--config", (out / "short.yaml").string(), "--out", out.string()});
  EXPECT_EQ(nc.code, kExitNonConvergence);
  json e = json::parse(slurp(out / "error.json"));
  EXPECT_EQ(e["iterations"], 3);
}

TEST(Cli, RunWritesArtifactsAndManifestReruns) {
  auto a = fresh_dir("run_a"), b = fresh_dir("run_b");
  write(a / "cfg.yaml", kSmallMac);
  auto r = cli({"run", "--config", (a / "cfg.yaml").string(), "--out", a.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"trajectory.csv", "solver.json", "ne.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(a / f)) << f;
  const std::string csv = slurp(a / "trajectory.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,u_1,u_2,x_1,x_2,R_1,R_2");
  EXPECT_EQ(lines(csv), 31);
  NeReport ne = ne_report_from_json(json::parse(slurp(a / "ne.json")));
  EXPECT_TRUE(ne.certified);
  SolveResult sr = solve_result_from_json(json::parse(slurp(a / "solver.json")));
  EXPECT_TRUE(sr.converged);
  EXPECT_EQ(sr.trajectory.horizon, 30);

  auto r2 = cli({"run", "--config", (a / "manifest.json").string(), "--out", b.string()});
  ASSERT_EQ(r2.code, kExitOk) << r2.err;
  EXPECT_EQ(slurp(b / "trajectory.csv"), csv);
  EXPECT_EQ(slurp(b / "solver.json"), slurp(a / "solver.json"));
}

TEST(Cli, BudgetExhaustionExitsTwo) {
  auto out = fresh_dir("budget");
  write(out / "cfg.yaml", std::string(kSmallMac) + "solver: {max_outer_iterations: 1}\n");
  auto r = cli({"run", "--config", (out / "cfg.yaml").string(), "--out", out.string(),
                "--format", "text"});
  EXPECT_EQ(r.code, kExitNonConvergence);
  EXPECT_TRUE(fs::exists(out / "solver.txt"));
}

TEST(Config, YamlAndJsonAgree) {
  RunConfig y = parse_config_yaml(
      "scenario: prop-fair\nseed: 3\nparameters: {grid_points: 10, channel_offset: [3, 2]}\n"
      "value_iteration: {epsilon: 1.0e-6}\nverify: {tolerance: 0.01}\n");
  RunConfig j = parse_config_json(
      R"({"scenario": "prop-fair", "seed": 3, "parameters": {"grid_points": 10,
          "channel_offset": [3, 2]}, "value_iteration": {"epsilon": 1e-6},
          "verify": {"tolerance": 0.01}})");
  EXPECT_EQ(y.scenario.id, j.scenario.id);
  EXPECT_EQ(y.scenario.seed, 3u);
  EXPECT_EQ(y.scenario.overrides, j.scenario.overrides);
  EXPECT_EQ(y.options.vi.epsilon, 1e-6);
  EXPECT_EQ(j.ne_tolerance, 0.01);
  EXPECT_THROW(parse_config_yaml("seed: 3\n"), ValidationError);
  EXPECT_THROW(parse_config_yaml("scenario: mac\nverify: {tolerance: high}\n"), ValidationError);
  EXPECT_THROW(parse_config_json("{"), ValidationError);
}

TEST(CliBinary, ExitStatusReachesTheShell) {
  const std::string exe = DPG_EXE;
  auto status = [&](const std::string& args) {
    int s = std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("--version"), 0);
  EXPECT_EQ(status("list-scenarios --format csv"), 0);
  EXPECT_EQ(status("run --scenario nope --out " + fresh_dir("bin").string()), 1);
}

}  // namespace
}  // namespace dpg::cli
