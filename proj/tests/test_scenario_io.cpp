#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <functional>

#include "consensus_lab/errors.hpp"
#include "consensus_lab/scenario_io.hpp"
#include "test_support.hpp"

using namespace consensus_lab;
using nlohmann::json;

namespace {

json base_doc() {
  return json::parse(R"({
    "schema": 1,
    "name": "base",
    "topology": {"adjacency": [[0, 1], [1, 0]], "leader_weights": [1, 0], "undirected": true},
    "agents": [{"drift": "zero"}, {"drift": "-v", "disturbance": 0.5}],
    "leader": {"drift": "zero"},
    "gains": {"lambda_xi": [2.0], "c": [1.0, 1.0]},
    "offsets": {"agents": [[-1, 0], [-2, 0]]},
    "initial_states": {"agents": [[-1, 0], [-2, 0]], "leader": [0, 0]},
    "sim": {"dt": 0.01, "duration": 1.0}
  })");
}

std::string error_path(const json& doc) {
  try {
    load_scenario_text(doc.dump(2), "doc");
  } catch (const ValidationError& err) {
    return err.path();
  }
  return "<no error>";
}

json mutated(const std::function<void(json&)>& edit) {
  json doc = base_doc();
  edit(doc);
  return doc;
}

}  // namespace

TEST(ScenarioIo, LoadsBundledScenarios) {
  for (const char* name : {"five_vehicles.json", "avoidance_pair.json", "obstacle.json", "pinned_star.json"}) {
    const ScenarioFile f = load_scenario_file(test_support::scenario(name));
    EXPECT_GE(f.scenario.num_agents(), 1) << name;
    EXPECT_EQ(f.scenario.order(), 2) << name;
  }
  const ScenarioFile fleet = load_scenario_file(test_support::scenario("five_vehicles.json"));
  EXPECT_EQ(fleet.scenario.num_agents(), 5);
  ASSERT_TRUE(fleet.bounds.has_value());
  EXPECT_DOUBLE_EQ(fleet.scenario.agents[2].mass, 1500.0);
  EXPECT_DOUBLE_EQ(fleet.scenario.leader.mass, 2000.0);
}

TEST(ScenarioIo, Defaults) {
  const Scenario s = load_scenario_text(base_doc().dump(), "doc").scenario;
  EXPECT_EQ(s.name, "base");
  EXPECT_DOUBLE_EQ(s.topology.nu1, 1.0);
  EXPECT_DOUBLE_EQ(s.gains.gamma1, 0.0);
  EXPECT_EQ(s.nn.f_basis.count(), 25);
  EXPECT_EQ(s.nn.w_basis.count(), 5);
  EXPECT_DOUBLE_EQ(s.nn.kappa, 0.05);
  EXPECT_DOUBLE_EQ(s.nn.gain, 10.0);
  EXPECT_TRUE(s.offsets.leader.isZero());
  EXPECT_DOUBLE_EQ(s.offsets.agents(1, 0), -2.0);
  EXPECT_EQ(s.record_stride, 10);
  EXPECT_DOUBLE_EQ(s.agents[1].disturbance(3.0), 0.5);
}

TEST(ScenarioIo, DisturbanceForms) {
  const json doc = mutated([](json& d) {
    d["agents"][0]["disturbance"] = {{"type", "sinusoid"}, {"amplitude", 2.0}, {"frequency", 3.0}};
    d["agents"][1]["disturbance"] = "0.5*sin(t)";
  });
  const Scenario s = load_scenario_text(doc.dump(), "doc").scenario;
  EXPECT_DOUBLE_EQ(s.agents[0].disturbance(0.1), 2.0 * std::sin(0.3));
  EXPECT_DOUBLE_EQ(s.agents[1].disturbance(0.2), 0.5 * std::sin(0.2));
  EXPECT_EQ(error_path(mutated([](json& d) { d["agents"][1]["disturbance"] = "s"; })),
            "/agents/1/disturbance");
}

TEST(ScenarioIo, LambdaForms) {
  const Scenario xi = load_scenario_text(
      mutated([](json& d) {
        d["order"] = 3;
        d["gains"]["lambda_xi"] = {1.0, 2.0};
        d["gains"]["c"] = {1, 1, 1};
        d["offsets"]["agents"] = {{-1, 0, 0}, {-2, 0, 0}};
        d["initial_states"] = {{"agents", {{-1, 0, 0}, {-2, 0, 0}}}, {"leader", {0, 0, 0}}};
      }).dump(), "doc").scenario;
  EXPECT_EQ(xi.gains.lambda_bar, Eigen::Vector2d(2, 3));
  EXPECT_EQ(xi.nn.f_basis.input_dimension(), 3);

  const json raw = mutated([](json& d) {
    d["gains"].erase("lambda_xi");
    d["gains"]["lambda_bar"] = {4.0};
  });
  EXPECT_DOUBLE_EQ(load_scenario_text(raw.dump(), "doc").scenario.gains.lambda_bar(0), 4.0);
  EXPECT_EQ(error_path(mutated([](json& d) { d["gains"]["lambda_bar"] = {1.0}; })), "/gains");
}

TEST(ScenarioIo, ErrorPaths) {
  EXPECT_EQ(error_path(mutated([](json& d) { d["schema"] = 2; })), "/schema");
  EXPECT_EQ(error_path(mutated([](json& d) { d.erase("gains"); })), "/gains");
  EXPECT_EQ(error_path(mutated([](json& d) { d["gains"]["c"] = {1.0}; })), "/gains/c");
  EXPECT_EQ(error_path(mutated([](json& d) { d["gains"]["gamma1"] = -1; })), "/gains/gamma1");
  EXPECT_EQ(error_path(mutated([](json& d) { d["gains"]["lambda_xi"] = {-1.0}; })),
            "/gains/lambda_xi");
  EXPECT_EQ(error_path(mutated([](json& d) { d["topology"]["adjacency"][0][1] = -1; })),
            "/topology/adjacency/0/1");
  EXPECT_EQ(error_path(mutated([](json& d) { d["topology"]["adjacency"][0][1] = 2; })),
            "/topology/adjacency/0/1");
  EXPECT_EQ(error_path(mutated([](json& d) { d["topology"]["leader_weights"] = {1}; })),
            "/topology/leader_weights");
  EXPECT_EQ(error_path(mutated([](json& d) { d["agents"][0]["drift"] = "1 +"; })),
            "/agents/0/drift");
  EXPECT_EQ(error_path(mutated([](json& d) { d["agents"][0]["mass"] = 0; })), "/agents/0/mass");
  EXPECT_EQ(error_path(mutated([](json& d) { d["sim"]["dt"] = 0; })), "/sim/dt");
  EXPECT_EQ(error_path(mutated([](json& d) { d["sim"]["duration"] = -1; })), "/sim/duration");
  EXPECT_EQ(error_path(mutated([](json& d) { d["initial_states"]["agents"] = {{0, 0}}; })),
            "/initial_states/agents");
  EXPECT_EQ(error_path(mutated([](json& d) { d["nn"] = {{"kappa", "x"}}; })), "/nn/kappa");
  EXPECT_EQ(error_path(mutated([](json& d) { d["nn"] = {{"f_basis", {{"type", "spline"}}}}; })),
            "/nn/f_basis/type");
  EXPECT_EQ(error_path(mutated([](json& d) { d["avoidance_direction"] = "up"; })),
            "/avoidance_direction");
}

TEST(ScenarioIo, MessagesCarrySourceLine) {
  const std::string text =
      "{\n"
      "  \"schema\": 1,\n"
      "  \"topology\": {\"adjacency\": [[0]], \"leader_weights\": [1]},\n"
      "  \"agents\": [{}],\n"
      "  \"leader\": {},\n"
      "  \"gains\": {\n"
      "    \"lambda_xi\": [2.0],\n"
      "    \"c\": [1.0]\n"
      "  },\n"
      "  \"initial_states\": {\"agents\": [[0, 0]], \"leader\": [0, 0]}\n"
      "}\n";
  try {
    load_scenario_text(text, "case.json");
    FAIL();
  } catch (const ValidationError& err) {
    EXPECT_EQ(err.path(), "/gains/c");
    EXPECT_EQ(std::string(err.what()).rfind("case.json:8: /gains/c: ", 0), 0u) << err.what();
  }
}

TEST(ScenarioIo, ParseErrorLocation) {
  try {
    load_scenario_text("{\n  \"schema\": 1,\n  \"name\": ,\n}", "bad.json");
    FAIL();
  } catch (const ValidationError& err) {
    EXPECT_EQ(std::string(err.what()).rfind("bad.json:3:11: JSON parse error", 0), 0u)
        << err.what();
  }
  EXPECT_THROW(load_scenario_file("/nonexistent/scenario.json"), ValidationError);
}

TEST(ScenarioIo, ProximityRule) {
  const json doc = mutated([](json& d) {
    d["topology"]["adjacency"] = {{0, 0}, {0, 0}};
    d["topology"]["leader_weights"] = {1, 1};
    d["topology"]["proximity_threshold"] = 1.5;
  });
  const ScenarioFile f = load_scenario_text(doc.dump(), "doc");
  ASSERT_TRUE(f.proximity_threshold.has_value());
  EXPECT_DOUBLE_EQ(f.scenario.topology.adjacency(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(f.scenario.topology.adjacency(1, 0), 1.0);
}

TEST(ScenarioIo, DeferredValidation) {
  const json doc = mutated([](json& d) { d["sim"]["dt"] = 5.0; });
  EXPECT_THROW(load_scenario_text(doc.dump(), "doc"), ValidationError);
  EXPECT_NO_THROW(load_scenario_text(doc.dump(), "doc", false));
}

TEST(ScenarioIo, Bounds) {
  const CuubBounds b = bounds_from_json(json{{"Theta_n", 2.0}, {"beta", 3.0}, {"e0_bound", 1.5}});
  EXPECT_DOUBLE_EQ(b.theta_n, 2.0);
  EXPECT_DOUBLE_EQ(b.beta, 3.0);
  EXPECT_DOUBLE_EQ(b.kappa, 0.05);
  ASSERT_TRUE(b.e0_bound.has_value());
  EXPECT_DOUBLE_EQ(*b.e0_bound, 1.5);
  try {
    bounds_from_json(json{{"T_M", -1.0}});
    FAIL();
  } catch (const ValidationError& err) {
    EXPECT_EQ(err.path(), "/bounds/T_M");
  }
}

TEST(ScenarioIo, SweepPointer) {
  EXPECT_EQ(sweep_pointer("kappa"), "/nn/kappa");
  EXPECT_EQ(sweep_pointer("gamma1"), "/gains/gamma1");
  EXPECT_EQ(sweep_pointer("nu2"), "/topology/nu2");
  EXPECT_EQ(sweep_pointer("dt"), "/sim/dt");
  EXPECT_EQ(sweep_pointer("/gains/c/0"), "/gains/c/0");
  EXPECT_FALSE(sweep_pointer("banana").has_value());
}

TEST(ScenarioIo, LocateLine) {
  const std::string text = "{\n \"a\": {\n  \"b\": 1\n },\n \"b\": 2\n}";
  EXPECT_EQ(locate_line(text, "/a/b"), 3);
  EXPECT_EQ(locate_line(text, "/a"), 2);
  EXPECT_FALSE(locate_line(text, "/zzz").has_value());
}
