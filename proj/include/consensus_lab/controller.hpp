#pragma once

#include <Eigen/Dense>

#include <vector>

#include "consensus_lab/dynamics.hpp"
#include "consensus_lab/estimator.hpp"
#include "consensus_lab/graph.hpp"
#include "consensus_lab/potentials.hpp"

namespace consensus_lab {

/// Desired formation offsets; row i of `agents` holds psi_i for every
/// derivative order.
struct Offsets {
  Eigen::MatrixXd agents;
  Eigen::VectorXd leader;

  static Offsets zero(Eigen::Index num_agents, Eigen::Index order) {
    return {Eigen::MatrixXd::Zero(num_agents, order), Eigen::VectorXd::Zero(order)};
  }
};

enum class AvoidanceDirection {
  /// Each potential pushes along sign(x_i - other).
  kRepulsive,
  /// Raw potential values summed without a direction.
  kSignless,
};

struct ControlGains {
  Eigen::VectorXd lambda_bar;  // lambda_1 .. lambda_{n-1}
  Eigen::VectorXd c;           // k^1 .. k^n
  double gamma0 = 0.0;         // obstacles
  double gamma1 = 0.0;         // other agents
  double gamma2 = 0.0;         // leader
  double chi = 1.0;
  double psi_ij = 1.0;
  double psi_i0 = 1.0;
  double detect_radius = 2.0;
  double obstacle_radius = 1.0;
  std::vector<double> obstacles;
  double alpha_bar = 1.0;
  AvoidanceDirection direction = AvoidanceDirection::kRepulsive;
  /// Drop the c * E_i0 leader feedback for agents that do not hear the leader.
  bool strict_decentralized = false;

  /// Throws ValidationError; `order` is the chain length n.
  void validate(Eigen::Index order) const;
};

/// Per-agent estimators of f_i, f_0 and w_i.
struct AgentEstimators {
  LipEstimator agent;
  LipEstimator leader;
  LipEstimator disturbance;
};

/// delta^k_i = (x_i^k - psi_i^k) - (x_0^k - psi_0^k); N x n.
Eigen::MatrixXd relative_errors(const FleetState& fleet, const Offsets& offsets);

/// e^k (k is 1-based) per agent from neighbour and leader disagreement.
Eigen::VectorXd sync_error(Eigen::Index k, const FleetState& fleet,
                           const Topology& topology, const Offsets& offsets);

/// All orders at once; column k-1 holds e^k.
Eigen::MatrixXd sync_errors(const FleetState& fleet, const Topology& topology,
                            const Offsets& offsets);

/// Coefficients with roots at -xi_j. Throws ValidationError unless xi > 0.
Eigen::VectorXd hurwitz_lambda(const Eigen::Ref<const Eigen::VectorXd>& xi);

bool check_hurwitz(const Eigen::Ref<const Eigen::VectorXd>& lambda_bar);

/// Solves Delta^T P1 + P1 Delta = -alpha_bar I. Throws NotHurwitz.
Eigen::MatrixXd lyapunov_P1(const Eigen::Ref<const Eigen::VectorXd>& lambda_bar,
                            double alpha_bar);

/// r = lambda_1 e^1 + ... + lambda_{n-1} e^{n-1} + e^n; e is N x n.
Eigen::VectorXd stability_error(const Eigen::Ref<const Eigen::MatrixXd>& e,
                                const Eigen::Ref<const Eigen::VectorXd>& lambda_bar);

/// rho = lambda_1 e^2 + ... + lambda_{n-1} e^n; e is N x n.
Eigen::VectorXd rho(const Eigen::Ref<const Eigen::MatrixXd>& e,
                    const Eigen::Ref<const Eigen::VectorXd>& lambda_bar);

/// Error quantities shared by every agent's control in one evaluation.
struct ErrorSnapshot {
  Eigen::MatrixXd e;      // N x n
  Eigen::VectorXd r;      // N
  Eigen::VectorXd rho;    // N
  Eigen::MatrixXd delta;  // N x n
};

ErrorSnapshot compute_errors(const FleetState& fleet, const Topology& topology,
                             const Offsets& offsets, const ControlGains& gains);

/// u_i = u_d - u_c - u_0.
struct ControlTerms {
  double feedback = 0.0;   // u_d
  double collision = 0.0;  // u_c
  double obstacle = 0.0;   // u_0
  double total = 0.0;
};

/// Avoidance contributions for agent i. With repulsive direction they are
/// signed so that subtracting them moves x_i away from the other body.
double collision_term(Eigen::Index i, const FleetState& fleet, const ControlGains& gains);
double obstacle_term(Eigen::Index i, const FleetState& fleet, const ControlGains& gains);

/// Current outputs theta^T phi of agent i's three estimators.
struct EstimatorOutputs {
  double agent = 0.0;        // f_i hat
  double leader = 0.0;       // f_0 hat
  double disturbance = 0.0;  // w_i hat
};

EstimatorOutputs evaluate_estimators(Eigen::Index i, const FleetState& fleet,
                                     const AgentEstimators& estimators);

/// Throws IsolatedAgent when d_i + b_i^0 = 0 and NonFinite when any term
/// is not finite.
ControlTerms control_terms(Eigen::Index i, const ErrorSnapshot& errors,
                           const FleetState& fleet, const Topology& topology,
                           const ControlGains& gains, const EstimatorOutputs& estimates);

ControlTerms control_terms(Eigen::Index i, const ErrorSnapshot& errors,
                           const FleetState& fleet, const Topology& topology,
                           const ControlGains& gains, const AgentEstimators& estimators);

double control_input(Eigen::Index i, const FleetState& fleet, const Topology& topology,
                     const Offsets& offsets, const ControlGains& gains,
                     const AgentEstimators& estimators);

}  // namespace consensus_lab
