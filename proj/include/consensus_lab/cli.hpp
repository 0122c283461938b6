#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace consensus_lab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitAborted = 2;

struct RunOverrides {
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<unsigned long long> seed;
};

/// Writes trace.csv, summary.json and the fig_*.csv plot tables to out_dir.
int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const RunOverrides& overrides, std::ostream& out, std::ostream& err);

/// Graph, Hurwitz and scenario checks, stopping at the first failure.
int cmd_check(const std::string& scenario_path, std::ostream& out, std::ostream& err);

/// Boundedness diagnostics. An empty bounds_path uses the scenario's
/// `bounds` block. json_path, when set, also receives the report as JSON.
int cmd_diagnose(const std::string& scenario_path, const std::string& bounds_path,
                 const std::string& json_path, std::ostream& out, std::ostream& err);

/// One run per value of a scalar field; "default" keeps the file's value.
int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::vector<std::string>& values, const std::string& out_dir,
              std::ostream& out, std::ostream& err);

/// Sweep worker count: CONSENSUS_LAB_THREADS when set, else the hardware
/// concurrency, never more than `jobs`.
unsigned sweep_threads(size_t jobs);

/// Full command-line entry point.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace consensus_lab::cli
