#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "consensus_lab/controller.hpp"
#include "consensus_lab/dynamics.hpp"
#include "consensus_lab/estimator.hpp"
#include "consensus_lab/graph.hpp"

namespace consensus_lab {

/// Basis and tuning parameters shared by every agent's three estimators.
struct NnConfig {
  BasisSpec f_basis;
  BasisSpec leader_basis;
  BasisSpec w_basis;
  double gain = 10.0;
  double gain0 = 10.0;
  double gainw = 10.0;
  double kappa = 0.05;
  double kappa0 = 0.05;
  double kappaw = 0.05;

  /// 5x5 Gaussian grid over [-10, 10]^2 for the agent and leader models,
  /// {1, sin 2t, cos 2t, sin t, cos t} for the disturbance.
  static NnConfig defaults(int order);
};

struct Scenario {
  std::string name;
  Topology topology;
  std::vector<AgentModel> agents;
  LeaderModel leader;
  ControlGains gains;
  Offsets offsets;
  NnConfig nn;
  FleetState initial;
  double duration = 40.0;
  double dt = 1e-3;
  int record_stride = 10;
  std::uint64_t seed = 0;
  /// Optional initial-state bounds X_n and X_n0, checked at load.
  std::optional<double> x_bound;
  std::optional<double> x0_bound;

  Eigen::Index num_agents() const { return topology.size(); }
  Eigen::Index order() const { return initial.order(); }
};

/// Throws ValidationError naming the offending field.
void validate_scenario(const Scenario& scenario);

/// Abort threshold on any estimator weight norm.
inline constexpr double kWeightNormLimit = 1e6;

/// Index bookkeeping of the packed closed-loop state:
/// [agents row-major (N*n) | leader (n) | per agent: theta, theta0, thetaw].
struct StateLayout {
  Eigen::Index num_agents = 0;
  Eigen::Index order = 0;
  Eigen::Index p_agent = 0;
  Eigen::Index p_leader = 0;
  Eigen::Index p_disturbance = 0;

  Eigen::Index size() const { return weights_offset() + num_agents * per_agent_weights(); }
  Eigen::Index leader_offset() const { return num_agents * order; }
  Eigen::Index weights_offset() const { return leader_offset() + order; }
  Eigen::Index per_agent_weights() const { return p_agent + p_leader + p_disturbance; }
  Eigen::Index agent_weights_offset(Eigen::Index i) const {
    return weights_offset() + i * per_agent_weights();
  }
};

/// Fleet state plus every agent's estimators, unpacked from the flat vector.
struct ClosedLoopState {
  FleetState fleet;
  std::vector<AgentEstimators> estimators;
};

/// The coupled plant + tuning-law vector field of one scenario.
class ClosedLoop {
 public:
  /// Validates the scenario and solves the graph Lyapunov data once.
  explicit ClosedLoop(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const GraphLyapunov& lyapunov() const { return lyap_; }
  const StateLayout& layout() const { return layout_; }

  Eigen::VectorXd initial_state() const;
  ClosedLoopState unpack(const Eigen::Ref<const Eigen::VectorXd>& x, double t) const;

  /// Pure function of (x, t). Propagates NonFinite, NonFiniteDrift and
  /// IsolatedAgent.
  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& x, double t) const;

 private:
  Scenario scenario_;
  GraphLyapunov lyap_;
  Eigen::VectorXd pin_;
  StateLayout layout_;
  std::vector<AgentEstimators> templates_;
};

/// Free-function spelling of ClosedLoop::operator().
inline Eigen::VectorXd derivative_field(const ClosedLoop& loop,
                                        const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
  return loop(x, t);
}

struct TraceRecord {
  double t = 0.0;
  FleetState state;
  Eigen::VectorXd u;              // N
  Eigen::MatrixXd e;              // N x n, column k-1 = e^k
  Eigen::VectorXd r;              // N
  Eigen::MatrixXd delta;          // N x n, E_i0 rows
  Eigen::MatrixXd weight_norms;   // N x 3: ||theta||, ||theta0||, ||thetaw||
  double min_pair_distance = 0.0;
  double min_obstacle_distance = 0.0;
};

struct Trace {
  Eigen::Index num_agents = 0;
  Eigen::Index order = 0;
  double t0 = 0.0;
  double duration = 0.0;
  std::vector<TraceRecord> records;
  std::optional<std::string> aborted;
};

/// Smallest |x_i^1 - x_j^1| over follower pairs (+inf for one agent).
double min_pair_distance(const FleetState& fleet);
/// Smallest follower distance to any obstacle (+inf without obstacles).
double min_obstacle_distance(const FleetState& fleet, const std::vector<double>& obstacles);

/// Integrates with fixed-step RK4. Failures are recorded in Trace::aborted,
/// never thrown.
Trace run(const Scenario& scenario);

struct Metrics {
  Eigen::MatrixXd peak_abs_error;    // N x n, max_t |delta_i^k|
  Eigen::MatrixXd final_abs_error;   // N x n
  Eigen::MatrixXd initial_abs_error; // N x n
  Eigen::MatrixXd window_max_error;  // N x n, over the final 20% of the run
  Eigen::VectorXd ultimate_bound;    // n, max over final 20% of ||delta^k||
  double settling_time = 0.0;
  double min_pair_distance = 0.0;
  double min_obstacle_distance = 0.0;
  double max_state_norm = 0.0;
  double max_weight_norm = 0.0;
};

/// Fraction of the run used for the ultimate-bound window.
inline constexpr double kUltimateWindow = 0.2;
/// Settling when ||delta^1|| stays below this factor times the bound.
inline constexpr double kSettlingFactor = 1.1;

/// Throws EmptyTrace when there are no records.
Metrics metrics(const Trace& trace);

}  // namespace consensus_lab
