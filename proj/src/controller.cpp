#include "consensus_lab/controller.hpp"

#include <cmath>
#include <string>

#include "consensus_lab/errors.hpp"
#include "consensus_lab/linalg.hpp"

namespace consensus_lab {

void ControlGains::validate(Eigen::Index order) const {
  if (lambda_bar.size() != order - 1) {
    throw ValidationError("/gains/lambda_xi",
                          "expected " + std::to_string(order - 1) + " coefficients");
  }
  if (!check_hurwitz(lambda_bar)) {
    throw ValidationError("/gains/lambda_xi", "coefficients are not Hurwitz");
  }
  if (c.size() != order) {
    throw ValidationError("/gains/c", "expected " + std::to_string(order) + " entries");
  }
  if (!c.allFinite()) throw ValidationError("/gains/c", "must be finite");
  auto nonneg = [](double v, const char* path) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(path, "must be >= 0");
  };
  auto positive = [](double v, const char* path) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(path, "must be positive");
  };
  nonneg(gamma0, "/gains/gamma0");
  nonneg(gamma1, "/gains/gamma1");
  nonneg(gamma2, "/gains/gamma2");
  positive(chi, "/gains/chi");
  positive(psi_ij, "/gains/psi_ij");
  positive(psi_i0, "/gains/psi_i0");
  positive(detect_radius, "/gains/R");
  positive(obstacle_radius, "/gains/core_radius");
  positive(alpha_bar, "/gains/alpha_bar");
  if (!(obstacle_radius < detect_radius)) {
    throw ValidationError("/gains/core_radius", "must be smaller than R");
  }
  for (size_t b = 0; b < obstacles.size(); ++b) {
    if (!std::isfinite(obstacles[b])) {
      throw ValidationError("/obstacles/" + std::to_string(b), "must be finite");
    }
  }
}

Eigen::MatrixXd relative_errors(const FleetState& fleet, const Offsets& offsets) {
  const Eigen::MatrixXd shifted = fleet.agents - offsets.agents;
  const Eigen::RowVectorXd leader = (fleet.leader - offsets.leader).transpose();
  return shifted.rowwise() - leader;
}

Eigen::VectorXd sync_error(Eigen::Index k, const FleetState& fleet, const Topology& topology,
                           const Offsets& offsets) {
  if (k < 1 || k > fleet.order()) {
    throw DimensionMismatch("sync_error: order index out of range");
  }
  const Eigen::Index n = fleet.num_agents();
  const Eigen::Index col = k - 1;
  Eigen::VectorXd e(n);
  const double leader = fleet.leader(col) - offsets.leader(col);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = fleet.agents(i, col) - offsets.agents(i, col);
    double neighbours = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = topology.adjacency(i, j);
      if (a != 0.0) neighbours += a * (xi - (fleet.agents(j, col) - offsets.agents(j, col)));
    }
    e(i) = -topology.nu1 * neighbours - topology.nu2 * topology.leader_weights(i) * (xi - leader);
  }
  return e;
}

Eigen::MatrixXd sync_errors(const FleetState& fleet, const Topology& topology,
                            const Offsets& offsets) {
  Eigen::MatrixXd e(fleet.num_agents(), fleet.order());
  for (Eigen::Index k = 1; k <= fleet.order(); ++k) {
    e.col(k - 1) = sync_error(k, fleet, topology, offsets);
  }
  return e;
}

Eigen::VectorXd hurwitz_lambda(const Eigen::Ref<const Eigen::VectorXd>& xi) {
  for (Eigen::Index j = 0; j < xi.size(); ++j) {
    if (!(xi(j) > 0.0)) throw ValidationError("/gains/lambda_xi", "xi values must be positive");
  }
  return hurwitz_coefficients(xi);
}

bool check_hurwitz(const Eigen::Ref<const Eigen::VectorXd>& lambda_bar) {
  return is_hurwitz(lambda_bar);
}

Eigen::MatrixXd lyapunov_P1(const Eigen::Ref<const Eigen::VectorXd>& lambda_bar,
                            double alpha_bar) {
  if (!check_hurwitz(lambda_bar)) {
    throw NotHurwitz("lambda coefficients do not define a Hurwitz polynomial");
  }
  const Eigen::Index m = lambda_bar.size();
  return solve_continuous_lyapunov(companion_matrix(lambda_bar),
                                   alpha_bar * Eigen::MatrixXd::Identity(m, m));
}

Eigen::VectorXd stability_error(const Eigen::Ref<const Eigen::MatrixXd>& e,
                                const Eigen::Ref<const Eigen::VectorXd>& lambda_bar) {
  const Eigen::Index n = e.cols();
  if (lambda_bar.size() != n - 1) throw DimensionMismatch("stability_error: lambda size");
  return e.leftCols(n - 1) * lambda_bar + e.col(n - 1);
}

Eigen::VectorXd rho(const Eigen::Ref<const Eigen::MatrixXd>& e,
                    const Eigen::Ref<const Eigen::VectorXd>& lambda_bar) {
  const Eigen::Index n = e.cols();
  if (n < 2 || lambda_bar.size() != n - 1) throw DimensionMismatch("rho: lambda size");
  return e.rightCols(n - 1) * lambda_bar;
}

ErrorSnapshot compute_errors(const FleetState& fleet, const Topology& topology,
                             const Offsets& offsets, const ControlGains& gains) {
  ErrorSnapshot s;
  s.e = sync_errors(fleet, topology, offsets);
  s.r = stability_error(s.e, gains.lambda_bar);
  s.rho = rho(s.e, gains.lambda_bar);
  s.delta = relative_errors(fleet, offsets);
  return s;
}

namespace {

// Direction that moves `a` away from `b`; ties resolve to +1.
double away(double a, double b) { return a >= b ? 1.0 : -1.0; }

}  // namespace

double collision_term(Eigen::Index i, const FleetState& fleet, const ControlGains& gains) {
  const bool signless = gains.direction == AvoidanceDirection::kSignless;
  const double xi = fleet.agents(i, 0);
  double agents = 0.0;
  for (Eigen::Index j = 0; j < fleet.num_agents(); ++j) {
    if (j == i) continue;
    const double xj = fleet.agents(j, 0);
    const double m = collision_potential(xi, xj, gains.chi, gains.psi_ij);
    if (m == 0.0) continue;
    // Coincident agents split by index so the pair still separates.
    const double dir = xi == xj ? (i > j ? 1.0 : -1.0) : away(xi, xj);
    agents += signless ? m : -m * dir;
  }
  const double m0 = leader_potential(xi, fleet.leader(0), gains.chi, gains.psi_i0);
  const double leader = signless ? m0 : -m0 * away(xi, fleet.leader(0));
  return gains.gamma1 * agents + gains.gamma2 * leader;
}

double obstacle_term(Eigen::Index i, const FleetState& fleet, const ControlGains& gains) {
  const bool signless = gains.direction == AvoidanceDirection::kSignless;
  const double xi = fleet.agents(i, 0);
  double sum = 0.0;
  for (double omega : gains.obstacles) {
    const double m =
        obstacle_potential(xi, omega, gains.detect_radius, gains.obstacle_radius);
    sum += signless ? m : -m * away(xi, omega);
  }
  return gains.gamma0 * sum;
}

EstimatorOutputs evaluate_estimators(Eigen::Index i, const FleetState& fleet,
                                     const AgentEstimators& estimators) {
  const double t = fleet.time;
  const Eigen::VectorXd xi = fleet.agents.row(i).transpose();
  EstimatorOutputs out;
  out.agent = estimate(estimators.agent, basis_eval(estimators.agent.basis, xi, t));
  out.disturbance =
      estimate(estimators.disturbance, basis_eval(estimators.disturbance.basis, xi, t));
  out.leader = estimate(estimators.leader, basis_eval(estimators.leader.basis, fleet.leader, t));
  return out;
}

ControlTerms control_terms(Eigen::Index i, const ErrorSnapshot& errors,
                           const FleetState& fleet, const Topology& topology,
                           const ControlGains& gains, const EstimatorOutputs& estimates) {
  const double pin = topology.adjacency.row(i).sum() + topology.leader_weights(i);
  if (!(pin > 0.0)) {
    throw IsolatedAgent("agent " + std::to_string(i + 1) +
                        " has d_i + b_i^0 = 0 and cannot be controlled");
  }
  double formation = gains.c.dot(errors.delta.row(i));
  if (gains.strict_decentralized && topology.leader_weights(i) == 0.0) formation = 0.0;

  ControlTerms out;
  out.feedback = errors.rho(i) / pin - estimates.agent - estimates.disturbance +
                 estimates.leader + errors.r(i) - formation;
  out.collision = collision_term(i, fleet, gains);
  out.obstacle = obstacle_term(i, fleet, gains);
  out.total = out.feedback - out.collision - out.obstacle;
  if (!std::isfinite(out.total)) {
    throw NonFinite("control input of agent " + std::to_string(i + 1) + " is not finite");
  }
  return out;
}

ControlTerms control_terms(Eigen::Index i, const ErrorSnapshot& errors,
                           const FleetState& fleet, const Topology& topology,
                           const ControlGains& gains, const AgentEstimators& estimators) {
  return control_terms(i, errors, fleet, topology, gains,
                       evaluate_estimators(i, fleet, estimators));
}

double control_input(Eigen::Index i, const FleetState& fleet, const Topology& topology,
                     const Offsets& offsets, const ControlGains& gains,
                     const AgentEstimators& estimators) {
  const ErrorSnapshot errors = compute_errors(fleet, topology, offsets, gains);
  return control_terms(i, errors, fleet, topology, gains, estimators).total;
}

}  // namespace consensus_lab
