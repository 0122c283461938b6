#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "consensus_lab/errors.hpp"
#include "consensus_lab/integrator.hpp"
#include "consensus_lab/scenario_io.hpp"
#include "consensus_lab/sim.hpp"
#include "consensus_lab/trace_io.hpp"
#include "test_support.hpp"

using namespace consensus_lab;

namespace {

const char* kSingleAgent = R"json({
  "schema": 1,
  "name": "single",
  "topology": {"adjacency": [[0]], "leader_weights": [1]},
  "agents": [{"drift": "sin(s)", "disturbance": 0.2}],
  "leader": {"drift": "cos(t)"},
  "gains": {"lambda_xi": [2.0], "c": [1.0, 1.0]},
  "initial_states": {"agents": [[1.0, 0.5]], "leader": [0.0, 0.0]},
  "sim": {"dt": 0.01, "duration": 1.0, "record_stride": 5}
})json";

Scenario single_agent() { return load_scenario_text(kSingleAgent, "single").scenario; }

double error_at_one(double dt) {
  const auto field = [](const Eigen::VectorXd& x, double) -> Eigen::VectorXd { return -x; };
  Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  const int steps = static_cast<int>(std::lround(1.0 / dt));
  for (int k = 0; k < steps; ++k) x = rk4_step(field, x, k * dt, dt);
  return std::abs(x(0) - std::exp(-1.0));
}

TraceRecord synthetic_record(double t, double err) {
  TraceRecord rec;
  rec.t = t;
  rec.state.agents = Eigen::MatrixXd::Zero(1, 2);
  rec.state.leader = Eigen::VectorXd::Zero(2);
  rec.u = Eigen::VectorXd::Zero(1);
  rec.e = Eigen::MatrixXd::Zero(1, 2);
  rec.r = Eigen::VectorXd::Zero(1);
  rec.delta = Eigen::MatrixXd::Zero(1, 2);
  rec.delta(0, 0) = err;
  rec.weight_norms = Eigen::MatrixXd::Zero(1, 3);
  rec.min_pair_distance = std::numeric_limits<double>::infinity();
  rec.min_obstacle_distance = std::numeric_limits<double>::infinity();
  return rec;
}

}  // namespace

TEST(Rk4, ExponentialDecay) {
  EXPECT_LE(error_at_one(0.01), 1e-6);
  const double ratio = error_at_one(0.1) / error_at_one(0.05);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Rk4, ZeroFieldKeepsState) {
  const auto field = [](const Eigen::VectorXd& x, double) -> Eigen::VectorXd {
    return Eigen::VectorXd::Zero(x.size());
  };
  const Eigen::Vector3d x(1, -2, 3);
  EXPECT_EQ(rk4_step(field, Eigen::VectorXd(x), 0.0, 0.5), Eigen::VectorXd(x));
}

TEST(Rk4, TimeOnlyFieldReducesToSimpson) {
  // With f = f(t) one step is Simpson's rule, exact for polynomials up to degree 3.
  const auto field = [](const Eigen::VectorXd&, double t) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, 3 * t * t);
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  x = rk4_step(field, x, 1.0, 1.0);
  EXPECT_NEAR(x(0), 8.0 - 1.0, 1e-14);
}

TEST(ClosedLoop, SingleAgentField) {
  const Scenario s = single_agent();
  const ClosedLoop loop(s);
  const StateLayout& lay = loop.layout();
  EXPECT_EQ(lay.size(), 2 + 2 + 25 + 25 + 5);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.3);
  Eigen::VectorXd x = loop.initial_state();
  for (Eigen::Index k = lay.weights_offset(); k < x.size(); ++k) x(k) = g(rng);
  const double t = 0.3;
  const Eigen::VectorXd before = x;
  const Eigen::VectorXd dx = loop(x, t);
  EXPECT_EQ(x, before);
  EXPECT_EQ(loop(x, t), dx);

  const Eigen::Vector2d xi(1.0, 0.5);
  const Eigen::Vector2d x0(0.0, 0.0);
  const auto theta = x.segment(lay.weights_offset(), 25);
  const auto theta0 = x.segment(lay.weights_offset() + 25, 25);
  const auto thetaw = x.segment(lay.weights_offset() + 50, 5);
  const Eigen::VectorXd phi = basis_eval(s.nn.f_basis, xi, t);
  const Eigen::VectorXd phi0 = basis_eval(s.nn.leader_basis, x0, t);
  const Eigen::VectorXd phiw = basis_eval(s.nn.w_basis, xi, t);
  // delta = (1, 0.5), e = -delta, r = -2.5, rho = -1, d + b = 1, p = 1.
  const double u = -1.0 - 2.5 - 1.5 - theta.dot(phi) - thetaw.dot(phiw) + theta0.dot(phi0);
  EXPECT_NEAR(dx(0), 0.5, 1e-15);
  EXPECT_NEAR(dx(1), std::sin(1.0) + u + 0.2, 1e-12);
  EXPECT_NEAR(dx(2), 0.0, 1e-15);
  EXPECT_NEAR(dx(3), std::cos(t), 1e-15);
  const double coupling = -2.5;
  const Eigen::VectorXd dtheta = -10.0 * (phi * coupling + 0.05 * theta);
  const Eigen::VectorXd dtheta0 = 10.0 * (phi0 * coupling - 0.05 * theta0);
  const Eigen::VectorXd dthetaw = -10.0 * (phiw * coupling + 0.05 * thetaw);
  EXPECT_LE((dx.segment(lay.weights_offset(), 25) - dtheta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((dx.segment(lay.weights_offset() + 25, 25) - dtheta0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((dx.segment(lay.weights_offset() + 50, 5) - dthetaw).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ClosedLoop, RejectsNonFiniteState) {
  const ClosedLoop loop(single_agent());
  Eigen::VectorXd x = loop.initial_state();
  x(0) = std::nan("");
  EXPECT_THROW(loop(x, 0.0), NonFinite);
}

TEST(Run, RecordsAndEndpoints) {
  const Trace trace = run(single_agent());
  ASSERT_FALSE(trace.aborted);
  // 100 steps recorded every 5 plus the initial record.
  ASSERT_EQ(trace.records.size(), 21u);
  EXPECT_DOUBLE_EQ(trace.records.front().t, 0.0);
  EXPECT_DOUBLE_EQ(trace.records.back().t, 1.0);
}

TEST(Run, ZeroDurationSingleRecord) {
  Scenario s = single_agent();
  s.duration = 0.0;
  const Trace trace = run(s);
  ASSERT_EQ(trace.records.size(), 1u);
  EXPECT_FALSE(trace.aborted);
  EXPECT_EQ(trace.records[0].state.agents, s.initial.agents);
}

TEST(Run, NonMultipleDurationEndsExactly) {
  Scenario s = single_agent();
  s.duration = 0.125;
  const Trace trace = run(s);
  EXPECT_DOUBLE_EQ(trace.records.back().t, 0.125);
}

TEST(Run, Deterministic) {
  Scenario s = load_scenario_file(test_support::scenario("pinned_star.json")).scenario;
  s.duration = 2.0;
  std::ostringstream a, b;
  write_trace_csv(a, run(s));
  write_trace_csv(b, run(s));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Run, AbortsOnDivergence) {
  Scenario s = single_agent();
  s.agents[0].drift = Drift::from_string("10*v^3");
  s.initial.agents << 5.0, 5.0;
  s.duration = 20.0;
  const Trace trace = run(s);
  ASSERT_TRUE(trace.aborted.has_value());
  EXPECT_FALSE(trace.records.empty());
}

TEST(Run, AvoidanceKeepsAgentsApart) {
  const Trace trace = run(load_scenario_file(test_support::scenario("avoidance_pair.json")).scenario);
  ASSERT_FALSE(trace.aborted);
  EXPECT_GT(metrics(trace).min_pair_distance, 0.0);
}

TEST(Metrics, ZeroTrace) {
  Trace trace;
  trace.num_agents = 1;
  trace.order = 2;
  for (int k = 0; k <= 10; ++k) trace.records.push_back(synthetic_record(k, 0.0));
  const Metrics m = metrics(trace);
  EXPECT_TRUE(m.peak_abs_error.isZero());
  EXPECT_TRUE(m.ultimate_bound.isZero());
  EXPECT_DOUBLE_EQ(m.settling_time, 0.0);
  EXPECT_TRUE(std::isinf(m.min_pair_distance));
}

TEST(Metrics, ExponentialSettling) {
  Trace trace;
  trace.num_agents = 1;
  trace.order = 2;
  const double stride = 0.1;
  for (int k = 0; k <= 100; ++k) {
    trace.records.push_back(synthetic_record(k * stride, std::exp(-k * stride)));
  }
  const Metrics m = metrics(trace);
  EXPECT_NEAR(m.ultimate_bound(0), std::exp(-8.0), 1e-12);
  EXPECT_DOUBLE_EQ(m.peak_abs_error(0, 0), 1.0);
  EXPECT_NEAR(m.final_abs_error(0, 0), std::exp(-10.0), 1e-15);
  // Crossing of exp(-t) = 1.1 exp(-8).
  EXPECT_NEAR(m.settling_time, 8.0 - std::log(1.1), stride);
}

TEST(Metrics, EmptyTraceThrows) {
  EXPECT_THROW(metrics(Trace{}), EmptyTrace);
}

TEST(Distances, PairAndObstacle) {
  FleetState f;
  f.agents = Eigen::MatrixXd(3, 2);
  f.agents << 0, 0, 2.5, 0, 1.0, 0;
  f.leader = Eigen::Vector2d::Zero();
  EXPECT_DOUBLE_EQ(min_pair_distance(f), 1.0);
  EXPECT_DOUBLE_EQ(min_obstacle_distance(f, {2.0, -4.0}), 0.5);
  EXPECT_TRUE(std::isinf(min_obstacle_distance(f, {})));
}
