#pragma once

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <vector>

#include "consensus_lab/sim.hpp"

namespace consensus_lab {

/// Column names of trace.csv, in file order.
std::vector<std::string> trace_columns(Eigen::Index num_agents, Eigen::Index order);

/// One header line plus one row per record, 17 significant digits.
void write_trace_csv(std::ostream& out, const Trace& trace);

/// Plot-data tables: positions, velocities, position errors, velocity
/// errors and control inputs against time. Keys are file names.
std::vector<std::pair<std::string, std::string>> figure_tables(const Trace& trace);

/// Metrics plus run bookkeeping; infinite distances become null.
nlohmann::json summary_json(const Scenario& scenario, const Trace& trace);

/// "%.17g", with "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double v);

}  // namespace consensus_lab
