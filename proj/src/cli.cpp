#include "consensus_lab/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "consensus_lab/diagnostics.hpp"
#include "consensus_lab/errors.hpp"
#include "consensus_lab/linalg.hpp"
#include "consensus_lab/scenario_io.hpp"
#include "consensus_lab/trace_io.hpp"

namespace consensus_lab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool write_file(const fs::path& path, const std::string& content, std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  if (!f) {
    err << "error: cannot write " << path.string() << "\n";
    return false;
  }
  return true;
}

bool ensure_dir(const std::string& dir, std::ostream& err) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create " << dir << ": " << ec.message() << "\n";
    return false;
  }
  return true;
}

double e0_norm(const Scenario& s) { return relative_errors(s.initial, s.offsets).norm(); }

json diagnostics_json(const DiagnosticsReport& rep) {
  json doc;
  json minors = json::array();
  for (size_t i = 0; i < 5; ++i) {
    minors.push_back({{"index", i + 1}, {"value", rep.sylvester.minors[i]},
                      {"passed", rep.sylvester.passed[i]}});
  }
  doc["minors"] = minors;
  doc["positive_definite"] = rep.sylvester.positive_definite();
  doc["first_failing_minor"] =
      rep.sylvester.first_failing ? json(*rep.sylvester.first_failing) : json(nullptr);
  doc["mu1"] = rep.entries.mu1;
  doc["mu1_threshold"] = rep.sylvester.mu1_threshold;
  doc["g"] = rep.entries.g;
  doc["gamma"] = {rep.entries.gamma1, rep.entries.gamma2, rep.entries.gamma3};
  doc["h"] = rep.h;
  doc["mu2"] = rep.mu2;
  doc["Lambda"] = rep.big_lambda;
  doc["omega"] = {rep.omega(0), rep.omega(1), rep.omega(2), rep.omega(3), rep.omega(4)};
  doc["omega_l1"] = rep.omega_l1;
  doc["sigma_min_K"] = rep.sigma_min_k;
  doc["B_d"] = rep.b_d;
  const GraphQuantities& g = rep.graph;
  doc["graph"] = {{"sigma_max_P", g.sigma_max_p},   {"sigma_min_Q", g.sigma_min_q},
                  {"sigma_max_A", g.sigma_max_a},   {"sigma_min_DB", g.sigma_min_db},
                  {"sigma_max_P1", g.sigma_max_p1}, {"sigma_max_Lp", g.sigma_max_lp},
                  {"lambda_norm", g.lambda_norm},   {"Delta_frobenius", g.delta_frobenius},
                  {"cE0", g.ce0}};
  return doc;
}

void set_pointer(json& doc, const std::string& pointer, double value) {
  json::json_pointer ptr(pointer);
  if (pointer == "/sim/seed") {
    doc[ptr] = static_cast<std::uint64_t>(value);
  } else if (pointer == "/sim/record_stride") {
    doc[ptr] = static_cast<int>(value);
  } else {
    doc[ptr] = value;
  }
}

struct SweepRow {
  double value = 0.0;
  double settling_time = 0.0;
  double ultimate_bound = 0.0;
  double min_pair_distance = 0.0;
  std::optional<std::string> failure;
};

}  // namespace

unsigned sweep_threads(size_t jobs) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CONSENSUS_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) cap = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::max<size_t>(1, std::min<size_t>(cap, jobs)));
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const RunOverrides& overrides, std::ostream& out, std::ostream& err) {
  Scenario scenario;
  try {
    scenario = load_scenario_file(scenario_path).scenario;
    if (overrides.dt) scenario.dt = *overrides.dt;
    if (overrides.duration) scenario.duration = *overrides.duration;
    if (overrides.seed) scenario.seed = *overrides.seed;
    validate_scenario(scenario);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  if (!ensure_dir(out_dir, err)) return kExitInvalid;

  const Trace trace = run(scenario);
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  const fs::path dir(out_dir);
  bool ok = write_file(dir / "trace.csv", csv.str(), err);
  ok = ok && write_file(dir / "summary.json", summary_json(scenario, trace).dump(2) + "\n", err);
  for (const auto& [name, content] : figure_tables(trace)) {
    ok = ok && write_file(dir / name, content, err);
  }
  if (!ok) return kExitInvalid;

  out << "records: " << trace.records.size() << "\n";
  if (trace.aborted) {
    err << "aborted: " << *trace.aborted << "\n";
    return kExitAborted;
  }
  const Metrics m = metrics(trace);
  out << "settling_time: " << format_number(m.settling_time) << "\n";
  out << "ultimate_bound_position: " << format_number(m.ultimate_bound(0)) << "\n";
  out << "min_pair_distance: " << format_number(m.min_pair_distance) << "\n";
  out << "wrote " << out_dir << "\n";
  return kExitOk;
}

int cmd_check(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
  Scenario s;
  try {
    s = load_scenario_file(scenario_path, false).scenario;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  auto fail = [&](const std::string& name, const std::string& why) {
    out << "FAIL " << name << ": " << why << "\n";
    err << "check failed: " << name << "\n";
    return kExitInvalid;
  };

  if (!has_leader_spanning_tree(s.topology)) {
    return fail("leader spanning tree", "some follower cannot be reached from the leader");
  }
  out << "PASS leader spanning tree\n";

  GraphLyapunov lyap;
  try {
    lyap = graph_lyapunov(s.topology);
  } catch (const SingularPinnedLaplacian& e) {
    return fail("pinned Laplacian", e.what());
  } catch (const NonPositiveQ& e) {
    return fail("Q positive definite", e.what());
  }
  out << "PASS pinned Laplacian: rcond " << format_number(lyap.rcond) << "\n";
  out << "PASS Q positive definite: min q " << format_number(lyap.q.minCoeff())
      << ", max P " << format_number(lyap.p_diag.maxCoeff()) << ", min eig Q "
      << format_number(lyap.min_eig_q) << "\n";

  if (s.gains.lambda_bar.size() != s.order() - 1 || !check_hurwitz(s.gains.lambda_bar)) {
    return fail("Hurwitz", "lambda coefficients do not define a Hurwitz polynomial");
  }
  out << "PASS Hurwitz\n";

  const Eigen::MatrixXd p1 = lyapunov_P1(s.gains.lambda_bar, s.gains.alpha_bar);
  const Eigen::MatrixXd delta = companion_matrix(s.gains.lambda_bar);
  const Eigen::Index m = p1.rows();
  const double residual =
      (delta.transpose() * p1 + p1 * delta + s.gains.alpha_bar * Eigen::MatrixXd::Identity(m, m))
          .norm();
  const double min_eig_p1 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p1).eigenvalues()(0);
  if (!(residual <= 1e-10) || !(min_eig_p1 > 0.0)) {
    return fail("P1", "residual " + format_number(residual) + ", min eig " +
                          format_number(min_eig_p1));
  }
  out << "PASS P1: residual " << format_number(residual) << ", min eig "
      << format_number(min_eig_p1) << "\n";

  try {
    validate_scenario(s);
  } catch (const ValidationError& e) {
    return fail("scenario", e.what());
  }
  out << "PASS scenario\n";
  return kExitOk;
}

int cmd_diagnose(const std::string& scenario_path, const std::string& bounds_path,
                 const std::string& json_path, std::ostream& out, std::ostream& err) {
  ScenarioFile file;
  CuubBounds bounds;
  GraphLyapunov lyap;
  try {
    file = load_scenario_file(scenario_path);
    if (!bounds_path.empty()) {
      bounds = bounds_from_json(read_json_file(bounds_path), "");
    } else if (file.bounds) {
      bounds = *file.bounds;
    } else {
      err << "error: no bounds given and the scenario has no \"bounds\" block\n";
      return kExitInvalid;
    }
    lyap = graph_lyapunov(file.scenario.topology);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  const Scenario& s = file.scenario;
  const DiagnosticsReport rep =
      cuub_diagnostics(bounds, s.topology, lyap, s.gains, e0_norm(s));

  for (size_t i = 0; i < 5; ++i) {
    out << "minor " << i + 1 << ": " << format_number(rep.sylvester.minors[i]) << " "
        << (rep.sylvester.passed[i] ? "PASS" : "FAIL") << "\n";
  }
  out << "mu1: " << format_number(rep.entries.mu1)
      << " (threshold " << format_number(rep.sylvester.mu1_threshold) << ")\n";
  out << "Lambda: " << format_number(rep.big_lambda) << "\n";
  out << "omega_l1: " << format_number(rep.omega_l1) << "\n";
  out << "sigma_min_K: " << format_number(rep.sigma_min_k) << "\n";
  out << "B_d: " << format_number(rep.b_d) << "\n";
  if (!json_path.empty()) {
    if (!write_file(json_path, diagnostics_json(rep).dump(2) + "\n", err)) return kExitInvalid;
  }
  if (!rep.sylvester.positive_definite()) {
    err << "K is not positive definite: minor " << *rep.sylvester.first_failing
        << " is not positive\n";
    return kExitInvalid;
  }
  return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::vector<std::string>& values, const std::string& out_dir,
              std::ostream& out, std::ostream& err) {
  if (values.empty()) {
    err << "error: empty value list\n";
    return kExitInvalid;
  }
  const auto pointer = sweep_pointer(param);
  if (!pointer) {
    err << "error: unknown sweep parameter '" << param << "'\n";
    return kExitInvalid;
  }
  json base;
  try {
    base = read_json_file(scenario_path);
    load_scenario_file(scenario_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  const json::json_pointer ptr(*pointer);
  // Raw pointers must name an existing field; short names may add one.
  if (param.front() == '/' && !base.contains(ptr)) {
    err << "error: unknown sweep parameter '" << param << "'\n";
    return kExitInvalid;
  }
  if (base.contains(ptr) && !base[ptr].is_number()) {
    err << "error: sweep parameter '" << param << "' is not a scalar number\n";
    return kExitInvalid;
  }

  std::vector<Scenario> scenarios;
  std::vector<SweepRow> rows(values.size());
  for (size_t k = 0; k < values.size(); ++k) {
    json doc = base;
    const std::string& text = values[k];
    try {
      if (text != "default") {
        size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        set_pointer(doc, *pointer, v);
      }
      ScenarioFile file = scenario_from_json(doc);
      validate_scenario(file.scenario);
      scenarios.push_back(std::move(file.scenario));
    } catch (const std::invalid_argument&) {
      err << "error: value '" << text << "' is not a number\n";
      return kExitInvalid;
    } catch (const std::out_of_range&) {
      err << "error: value '" << text << "' is out of range\n";
      return kExitInvalid;
    } catch (const Error& e) {
      err << "error: value " << text << ": " << e.what() << "\n";
      return kExitInvalid;
    }
    rows[k].value = doc.contains(ptr) && doc[ptr].is_number() ? doc[ptr].get<double>()
                                                              : std::nan("");
  }
  if (!ensure_dir(out_dir, err)) return kExitInvalid;

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < scenarios.size(); k = next++) {
      const Trace trace = run(scenarios[k]);
      SweepRow& row = rows[k];
      if (trace.aborted) {
        row.failure = *trace.aborted;
        row.settling_time = row.ultimate_bound = row.min_pair_distance = std::nan("");
        continue;
      }
      const Metrics m = metrics(trace);
      row.settling_time = m.settling_time;
      row.ultimate_bound = m.ultimate_bound(0);
      row.min_pair_distance = m.min_pair_distance;
    }
  };
  const unsigned threads = sweep_threads(scenarios.size());
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::ostringstream csv;
  csv << "value,settling_time,ultimate_bound,min_pair_distance\n";
  bool aborted = false;
  for (size_t k = 0; k < rows.size(); ++k) {
    const SweepRow& r = rows[k];
    csv << format_number(r.value) << ',' << format_number(r.settling_time) << ','
        << format_number(r.ultimate_bound) << ',' << format_number(r.min_pair_distance) << '\n';
    if (r.failure) {
      aborted = true;
      err << "run " << values[k] << " aborted: " << *r.failure << "\n";
    }
  }
  if (!write_file(fs::path(out_dir) / "sweep.csv", csv.str(), err)) return kExitInvalid;
  out << "wrote " << rows.size() << " rows to " << (fs::path(out_dir) / "sweep.csv").string()
      << "\n";
  return aborted ? kExitAborted : kExitOk;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed adaptive leader-follower consensus simulator"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir;
  std::string bounds;
  std::string json_path;
  std::string param;
  std::vector<std::string> values;
  RunOverrides overrides;
  double dt = 0.0;
  double duration = 0.0;
  unsigned long long seed = 0;

  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write traces");
  run_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  auto* dt_opt = run_cmd->add_option("--dt", dt, "Override the step size");
  auto* dur_opt = run_cmd->add_option("--duration", duration, "Override the horizon");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the seed");

  auto* check_cmd = app.add_subcommand("check", "Graph and gain checks");
  check_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();

  auto* diag_cmd = app.add_subcommand("diagnose", "Ultimate-bound diagnostics");
  diag_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  diag_cmd->add_option("--bounds", bounds, "Bounds JSON (default: the scenario's bounds)");
  diag_cmd->add_option("--json", json_path, "Also write the report as JSON");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run one simulation per parameter value");
  sweep_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  sweep_cmd->add_option("--param", param, "Parameter name or JSON pointer")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  if (*run_cmd) {
    if (dt_opt->count()) overrides.dt = dt;
    if (dur_opt->count()) overrides.duration = duration;
    if (seed_opt->count()) overrides.seed = seed;
    return cmd_run(scenario, out_dir, overrides, out, err);
  }
  if (*check_cmd) return cmd_check(scenario, out, err);
  if (*diag_cmd) return cmd_diagnose(scenario, bounds, json_path, out, err);
  values.erase(std::remove(values.begin(), values.end(), std::string()), values.end());
  return cmd_sweep(scenario, param, values, out_dir, out, err);
}

}  // namespace consensus_lab::cli
