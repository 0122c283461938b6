#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "consensus_lab/cli.hpp"
#include "consensus_lab/scenario_io.hpp"
#include "consensus_lab/trace_io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
namespace cli = consensus_lab::cli;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "consensus_lab");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Result r;
  r.code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_doc(const fs::path& dir, const std::string& name, const json& doc) {
  const fs::path p = dir / name;
  std::ofstream(p) << doc.dump(2);
  return p.string();
}

json load(const std::string& name) {
  return consensus_lab::read_json_file(test_support::scenario(name));
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Cli, RunWritesOutputs) {
  const fs::path dir = test_support::temp_dir("cli_run");
  const Result r = invoke({"run", "--scenario", test_support::scenario("five_vehicles.json"), "--out",
                           dir.string(), "--duration", "2"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  for (const char* f : {"trace.csv", "summary.json", "fig_positions.csv", "fig_velocities.csv",
                        "fig_pos_error.csv", "fig_vel_error.csv", "fig_controls.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const std::vector<std::string> trace = lines(slurp(dir / "trace.csv"));
  ASSERT_FALSE(trace.empty());
  const std::string header = trace.front();
  EXPECT_EQ(header.rfind("t,s_1,v_1,s_2,v_2,", 0), 0u) << header;
  EXPECT_NE(header.find(",s_0,v_0,u_1,"), std::string::npos);
  EXPECT_NE(header.find(",E1_5,E2_1,"), std::string::npos);
  EXPECT_NE(header.find(",theta_1,theta0_1,thetaw_1,"), std::string::npos);
  EXPECT_EQ(header.substr(header.size() - 39), "min_pair_distance,min_obstacle_distance");
  // 2000 steps, stride 10, plus the initial row and the header.
  EXPECT_EQ(trace.size(), 202u);

  EXPECT_EQ(lines(slurp(dir / "fig_positions.csv")).front(), "t,s_0,s_1,s_2,s_3,s_4,s_5");
  EXPECT_EQ(lines(slurp(dir / "fig_controls.csv")).front(), "t,u_1,u_2,u_3,u_4,u_5");
  EXPECT_EQ(lines(slurp(dir / "fig_pos_error.csv")).front(), "t,E1_1,E1_2,E1_3,E1_4,E1_5");

  const json summary = json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary["num_agents"], 5);
  EXPECT_EQ(summary["records"], 201);
  EXPECT_TRUE(summary["aborted"].is_null());
  EXPECT_EQ(summary["metrics"]["ultimate_bound"].size(), 2u);
}

TEST(Cli, RunIsByteIdentical) {
  const fs::path a = test_support::temp_dir("cli_det_a");
  const fs::path b = test_support::temp_dir("cli_det_b");
  const std::string s = test_support::scenario("pinned_star.json");
  ASSERT_EQ(invoke({"run", "--scenario", s, "--out", a.string(), "--duration", "1"}).code, 0);
  ASSERT_EQ(invoke({"run", "--scenario", s, "--out", b.string(), "--duration", "1"}).code, 0);
  for (const char* f : {"trace.csv", "summary.json", "fig_positions.csv", "fig_controls.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, RunZeroDuration) {
  const fs::path dir = test_support::temp_dir("cli_zero");
  const Result r = invoke({"run", "--scenario", test_support::scenario("pinned_star.json"),
                           "--out", dir.string(), "--duration", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(slurp(dir / "trace.csv")).size(), 2u);
}

TEST(Cli, RunMalformedJson) {
  const fs::path dir = test_support::temp_dir("cli_bad");
  const fs::path p = dir / "bad.json";
  std::ofstream(p) << "{\n  \"schema\": 1,\n  \"name\": \n";
  const Result r = invoke({"run", "--scenario", p.string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("bad.json:4:"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "o" / "trace.csv"));
}

TEST(Cli, RunInvalidField) {
  const fs::path dir = test_support::temp_dir("cli_invalid");
  json doc = load("pinned_star.json");
  doc["gains"]["c"] = {1.0};
  const Result r = invoke({"run", "--scenario", write_doc(dir, "s.json", doc), "--out",
                           (dir / "o").string()});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("/gains/c"), std::string::npos) << r.err;
}

TEST(Cli, RunAbortExitCode) {
  const fs::path dir = test_support::temp_dir("cli_abort");
  json doc = load("pinned_star.json");
  doc["agents"][0]["drift"] = "10*v^3";
  doc["initial_states"]["agents"][0] = {5.0, 5.0};
  const Result r = invoke({"run", "--scenario", write_doc(dir, "s.json", doc), "--out",
                           (dir / "o").string()});
  EXPECT_EQ(r.code, cli::kExitAborted) << r.out << r.err;
  EXPECT_TRUE(fs::exists(dir / "o" / "trace.csv"));
}

TEST(Cli, CheckPasses) {
  const Result r = invoke({"check", "--scenario", test_support::scenario("five_vehicles.json")});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  for (const char* name : {"PASS leader spanning tree", "PASS pinned Laplacian",
                           "PASS Q positive definite", "PASS Hurwitz", "PASS P1",
                           "PASS scenario"}) {
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
  }
}

TEST(Cli, CheckUnreachableFollower) {
  const fs::path dir = test_support::temp_dir("cli_check_tree");
  json doc = load("pinned_star.json");
  doc["topology"]["leader_weights"] = {1, 0, 1};
  const Result r = invoke({"check", "--scenario", write_doc(dir, "s.json", doc)});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.out.find("FAIL leader spanning tree"), std::string::npos) << r.out;
}

TEST(Cli, CheckNotHurwitz) {
  const fs::path dir = test_support::temp_dir("cli_check_hurwitz");
  json doc = load("pinned_star.json");
  doc["gains"].erase("lambda_xi");
  doc["gains"]["lambda_bar"] = {-1.0};
  const Result r = invoke({"check", "--scenario", write_doc(dir, "s.json", doc)});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.out.find("FAIL Hurwitz"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PASS Q positive definite"), std::string::npos);
}

TEST(Cli, DiagnosePasses) {
  const fs::path dir = test_support::temp_dir("cli_diag");
  const Result r = invoke({"diagnose", "--scenario", test_support::scenario("pinned_star.json"),
                           "--json", (dir / "d.json").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("minor 5: "), std::string::npos);
  EXPECT_NE(r.out.find("B_d: "), std::string::npos);
  const json report = json::parse(slurp(dir / "d.json"));
  EXPECT_TRUE(report["positive_definite"].get<bool>());
}

TEST(Cli, DiagnoseZeroBounds) {
  const Result r = invoke({"diagnose", "--scenario", test_support::scenario("pinned_star.json"),
                           "--bounds", test_support::scenario("bounds_zero.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("omega_l1: "), std::string::npos);
}

TEST(Cli, DiagnoseFailingMinor) {
  const Result r = invoke({"diagnose", "--scenario", test_support::scenario("five_vehicles.json")});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.out.find("minor 5: "), std::string::npos);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  EXPECT_NE(r.err.find("minor 5 is not positive"), std::string::npos) << r.err;
}

TEST(Cli, SweepRows) {
  const fs::path dir = test_support::temp_dir("cli_sweep");
  json doc = load("pinned_star.json");
  doc["sim"]["duration"] = 1.0;
  const std::string s = write_doc(dir, "s.json", doc);
  const Result r = invoke({"sweep", "--scenario", s, "--param", "kappa", "--values",
                           "0.01,0.05,0.5", "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::vector<std::string> rows = lines(slurp(dir / "o" / "sweep.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "value,settling_time,ultimate_bound,min_pair_distance");
  EXPECT_EQ(rows[1].rfind("0.01,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("0.5,", 0), 0u);
}

TEST(Cli, SweepRejectsBadInput) {
  const std::string s = test_support::scenario("pinned_star.json");
  const std::string out = test_support::temp_dir("cli_sweep_bad").string();
  std::ostringstream o, e;
  EXPECT_EQ(cli::cmd_sweep(s, "kappa", {}, out, o, e), cli::kExitInvalid);
  EXPECT_EQ(invoke({"sweep", "--scenario", s, "--param", "banana", "--values", "1", "--out", out})
                .code,
            cli::kExitInvalid);
  EXPECT_EQ(invoke({"sweep", "--scenario", s, "--param", "/gains/nothing", "--values", "1",
                    "--out", out})
                .code,
            cli::kExitInvalid);
  EXPECT_EQ(invoke({"sweep", "--scenario", s, "--param", "kappa", "--values", "abc", "--out", out})
                .code,
            cli::kExitInvalid);
  EXPECT_EQ(invoke({"sweep", "--scenario", s, "--param", "/gains/c", "--values", "1", "--out", out})
                .code,
            cli::kExitInvalid);
}

TEST(Cli, SweepAvoidanceCausality) {
  const fs::path dir = test_support::temp_dir("cli_sweep_gamma");
  const Result r = invoke({"sweep", "--scenario", test_support::scenario("avoidance_pair.json"),
                           "--param", "gamma1", "--values", "0,default", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::vector<std::string> rows = lines(slurp(dir / "sweep.csv"));
  ASSERT_EQ(rows.size(), 3u);
  const auto min_distance = [](const std::string& row) {
    return std::stod(row.substr(row.rfind(',') + 1));
  };
  EXPECT_GT(min_distance(rows[2]), 10.0 * min_distance(rows[1]));
  EXPECT_GT(min_distance(rows[2]), 0.1);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"run", "--scenario", "x.json"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
}

TEST(Cli, SweepThreads) {
  EXPECT_GE(cli::sweep_threads(4), 1u);
  EXPECT_LE(cli::sweep_threads(4), 4u);
  EXPECT_EQ(cli::sweep_threads(1), 1u);
}
