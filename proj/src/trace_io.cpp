#include "consensus_lab/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace consensus_lab {

using nlohmann::json;

namespace {

std::string channel(Eigen::Index k) {
  if (k == 0) return "s";
  if (k == 1) return "v";
  return "x" + std::to_string(k + 1);
}

std::string agent(Eigen::Index i) { return std::to_string(i + 1); }

void write_row(std::ostream& out, const std::vector<double>& row) {
  for (size_t c = 0; c < row.size(); ++c) {
    if (c) out << ',';
    out << format_number(row[c]);
  }
  out << '\n';
}

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (size_t c = 0; c < cols.size(); ++c) {
    if (c) out << ',';
    out << cols[c];
  }
  out << '\n';
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(finite_or_null(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> trace_columns(Eigen::Index num_agents, Eigen::Index order) {
  std::vector<std::string> cols{"t"};
  for (Eigen::Index i = 0; i < num_agents; ++i) {
    for (Eigen::Index k = 0; k < order; ++k) cols.push_back(channel(k) + "_" + agent(i));
  }
  for (Eigen::Index k = 0; k < order; ++k) cols.push_back(channel(k) + "_0");
  for (Eigen::Index i = 0; i < num_agents; ++i) cols.push_back("u_" + agent(i));
  for (Eigen::Index k = 0; k < order; ++k) {
    for (Eigen::Index i = 0; i < num_agents; ++i) {
      cols.push_back("e" + std::to_string(k + 1) + "_" + agent(i));
    }
  }
  for (Eigen::Index i = 0; i < num_agents; ++i) cols.push_back("r_" + agent(i));
  for (Eigen::Index k = 0; k < order; ++k) {
    for (Eigen::Index i = 0; i < num_agents; ++i) {
      cols.push_back("E" + std::to_string(k + 1) + "_" + agent(i));
    }
  }
  for (Eigen::Index i = 0; i < num_agents; ++i) {
    cols.push_back("theta_" + agent(i));
    cols.push_back("theta0_" + agent(i));
    cols.push_back("thetaw_" + agent(i));
  }
  cols.push_back("min_pair_distance");
  cols.push_back("min_obstacle_distance");
  return cols;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  const Eigen::Index n_agents = trace.num_agents;
  const Eigen::Index order = trace.order;
  write_header(out, trace_columns(n_agents, order));
  std::vector<double> row;
  for (const TraceRecord& rec : trace.records) {
    row.clear();
    row.push_back(rec.t);
    for (Eigen::Index i = 0; i < n_agents; ++i) {
      for (Eigen::Index k = 0; k < order; ++k) row.push_back(rec.state.agents(i, k));
    }
    for (Eigen::Index k = 0; k < order; ++k) row.push_back(rec.state.leader(k));
    for (Eigen::Index i = 0; i < n_agents; ++i) row.push_back(rec.u(i));
    for (Eigen::Index k = 0; k < order; ++k) {
      for (Eigen::Index i = 0; i < n_agents; ++i) row.push_back(rec.e(i, k));
    }
    for (Eigen::Index i = 0; i < n_agents; ++i) row.push_back(rec.r(i));
    for (Eigen::Index k = 0; k < order; ++k) {
      for (Eigen::Index i = 0; i < n_agents; ++i) row.push_back(rec.delta(i, k));
    }
    for (Eigen::Index i = 0; i < n_agents; ++i) {
      for (Eigen::Index w = 0; w < 3; ++w) row.push_back(rec.weight_norms(i, w));
    }
    row.push_back(rec.min_pair_distance);
    row.push_back(rec.min_obstacle_distance);
    write_row(out, row);
  }
}

std::vector<std::pair<std::string, std::string>> figure_tables(const Trace& trace) {
  const Eigen::Index n_agents = trace.num_agents;
  enum class Source { kState, kDelta, kControl };
  struct Figure {
    const char* file;
    Source source;
    Eigen::Index channel;
  };
  const Figure figures[] = {
      {"fig_positions.csv", Source::kState, 0},
      {"fig_velocities.csv", Source::kState, 1},
      {"fig_pos_error.csv", Source::kDelta, 0},
      {"fig_vel_error.csv", Source::kDelta, 1},
      {"fig_controls.csv", Source::kControl, 0},
  };
  std::vector<std::pair<std::string, std::string>> out;
  for (const Figure& fig : figures) {
    std::ostringstream os;
    std::vector<std::string> cols{"t"};
    const std::string prefix = fig.source == Source::kState    ? channel(fig.channel)
                               : fig.source == Source::kDelta ? "E" + std::to_string(fig.channel + 1)
                                                              : "u";
    if (fig.source == Source::kState) cols.push_back(prefix + "_0");
    for (Eigen::Index i = 0; i < n_agents; ++i) cols.push_back(prefix + "_" + agent(i));
    write_header(os, cols);
    std::vector<double> row;
    for (const TraceRecord& rec : trace.records) {
      row.assign(1, rec.t);
      switch (fig.source) {
        case Source::kState:
          row.push_back(rec.state.leader(fig.channel));
          for (Eigen::Index i = 0; i < n_agents; ++i) row.push_back(rec.state.agents(i, fig.channel));
          break;
        case Source::kDelta:
          for (Eigen::Index i = 0; i < n_agents; ++i) row.push_back(rec.delta(i, fig.channel));
          break;
        case Source::kControl:
          for (Eigen::Index i = 0; i < n_agents; ++i) row.push_back(rec.u(i));
          break;
      }
      write_row(os, row);
    }
    out.emplace_back(fig.file, os.str());
  }
  return out;
}

json summary_json(const Scenario& scenario, const Trace& trace) {
  json doc;
  doc["scenario"] = scenario.name;
  doc["num_agents"] = trace.num_agents;
  doc["order"] = trace.order;
  doc["t0"] = trace.t0;
  doc["duration"] = trace.duration;
  doc["dt"] = scenario.dt;
  doc["records"] = trace.records.size();
  doc["aborted"] = trace.aborted ? json(*trace.aborted) : json(nullptr);
  if (trace.records.empty()) return doc;
  const Metrics m = metrics(trace);
  json metrics_doc;
  metrics_doc["peak_abs_error"] = matrix_json(m.peak_abs_error);
  metrics_doc["final_abs_error"] = matrix_json(m.final_abs_error);
  metrics_doc["initial_abs_error"] = matrix_json(m.initial_abs_error);
  metrics_doc["window_max_error"] = matrix_json(m.window_max_error);
  json bound = json::array();
  for (Eigen::Index k = 0; k < m.ultimate_bound.size(); ++k) bound.push_back(m.ultimate_bound(k));
  metrics_doc["ultimate_bound"] = bound;
  metrics_doc["settling_time"] = m.settling_time;
  metrics_doc["min_pair_distance"] = finite_or_null(m.min_pair_distance);
  metrics_doc["min_obstacle_distance"] = finite_or_null(m.min_obstacle_distance);
  metrics_doc["max_state_norm"] = m.max_state_norm;
  metrics_doc["max_weight_norm"] = m.max_weight_norm;
  doc["metrics"] = metrics_doc;
  return doc;
}

}  // namespace consensus_lab
