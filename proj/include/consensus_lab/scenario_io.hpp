#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

#include "consensus_lab/diagnostics.hpp"
#include "consensus_lab/sim.hpp"

namespace consensus_lab {

inline constexpr int kScenarioSchema = 1;

/// A parsed scenario file: the simulation description plus the optional
/// `bounds` block used by the diagnostics command.
struct ScenarioFile {
  Scenario scenario;
  std::optional<CuubBounds> bounds;
  /// Psi of the proximity rule, when declared. Already applied to the
  /// topology at the initial positions.
  std::optional<double> proximity_threshold;
};

/// Builds a scenario from a JSON document. Errors are ValidationError with
/// a JSON-pointer path; cross-field invariants are checked with
/// validate_scenario.
ScenarioFile scenario_from_json(const nlohmann::json& doc);

/// Reads and parses a file. Syntax errors become ValidationError with line
/// and column; validation errors are prefixed with the source line of the
/// offending key when it can be located. With `validate` false only the
/// per-field checks run, so callers can report cross-field checks one by one.
ScenarioFile load_scenario_file(const std::string& path, bool validate = true);

/// Parses the text of a scenario document with the same error handling as
/// load_scenario_file; `source` names the text in messages.
ScenarioFile load_scenario_text(const std::string& text, const std::string& source,
                                bool validate = true);

nlohmann::json read_json_file(const std::string& path);

/// CuubBounds from a standalone bounds document or a scenario's `bounds`.
CuubBounds bounds_from_json(const nlohmann::json& doc, const std::string& path = "/bounds");

/// Best-effort 1-based line of the key addressed by a JSON pointer.
std::optional<int> locate_line(const std::string& text, const std::string& pointer);

/// Maps a short sweep name (kappa, gamma1, nu1, dt, ...) to its JSON
/// pointer. Strings starting with '/' pass through unchanged.
std::optional<std::string> sweep_pointer(const std::string& name);

}  // namespace consensus_lab
