#include "consensus_lab/dynamics.hpp"

#include <cmath>
#include <utility>

#include "consensus_lab/errors.hpp"

namespace consensus_lab {

namespace {

struct BuiltinName {
  const char* name;
  Drift::Builtin id;
};

constexpr BuiltinName kBuiltinNames[] = {
    {"zero", Drift::Builtin::kZero},
    {"vehicle1", Drift::Builtin::kVehicle1},
    {"vehicle2", Drift::Builtin::kVehicle2},
    {"vehicle3", Drift::Builtin::kVehicle3},
    {"vehicle4", Drift::Builtin::kVehicle4},
    {"vehicle5", Drift::Builtin::kVehicle5},
    {"vehicle_leader", Drift::Builtin::kVehicleLeader},
};

double grade_force(double s) { return kGravity * std::sin(road_grade(s)); }

}  // namespace

Drift Drift::from_string(const std::string& text) {
  for (const auto& b : kBuiltinNames) {
    if (text == b.name) return builtin(b.id);
  }
  return expression(Expression::parse(text));
}

int Drift::required_order() const {
  if (is_expression_) return expr_.max_channel();
  return builtin_ == Builtin::kZero ? 0 : 2;
}

std::string Drift::describe() const {
  if (is_expression_) return expr_.text();
  for (const auto& b : kBuiltinNames) {
    if (b.id == builtin_) return b.name;
  }
  return "?";
}

double Drift::operator()(const Eigen::Ref<const Eigen::VectorXd>& x, double t,
                         double m) const {
  if (is_expression_) return expr_.evaluate(x, t, m);
  if (builtin_ == Builtin::kZero) return 0.0;
  if (x.size() < 2) {
    throw DimensionMismatch("vehicle drift models need a second-order state");
  }
  const double s = x(0);
  const double v = x(1);
  switch (builtin_) {
    case Builtin::kZero:
      return 0.0;
    case Builtin::kVehicle1:
      return v * std::sin(s) / m + std::pow(std::cos(v), 2) - 0.47 * v * v / m -
             grade_force(s);
    case Builtin::kVehicle2:
      return -s * s * v / m + std::pow(std::cos(v), 2) - 0.52 * v * v / m - grade_force(s);
    case Builtin::kVehicle3:
      return -s * s * v / m + std::pow(std::sin(v), 2) - 0.57 * v * v / m - grade_force(s);
    case Builtin::kVehicle4: {
      const double w = s + v - 1.0;
      return -3.0 * w * w * w / m - v + 0.5 * std::sin(2.0 * t) + std::cos(2.0 * t) -
             0.65 * v * v / m - grade_force(s);
    }
    case Builtin::kVehicle5:
      return std::cos(s) - 0.74 * v * v / m - grade_force(s);
    case Builtin::kVehicleLeader: {
      const double w = s + v - 1.0;
      return -3.0 * v + 1.0 - grade_force(s) - 0.4 * v * v / m +
             (3.0 * std::sin(2.0 * t) + 6.0 * std::cos(2.0 * t)) / m -
             w * w / (3.0 * m) * (s + 4.0 * v - 1.0);
    }
  }
  return 0.0;
}

double Disturbance::operator()(double t) const {
  switch (kind) {
    case Kind::kZero:
      return 0.0;
    case Kind::kConstant:
      return value;
    case Kind::kSinusoid:
      return amplitude * std::sin(frequency * t + phase);
    case Kind::kExpression:
      return expr.evaluate(Eigen::VectorXd(), t, 0.0);
  }
  return 0.0;
}

namespace {

Eigen::VectorXd chain(const Eigen::Ref<const Eigen::VectorXd>& state, double last) {
  const Eigen::Index n = state.size();
  Eigen::VectorXd out(n);
  out.head(n - 1) = state.tail(n - 1);
  out(n - 1) = last;
  return out;
}

}  // namespace

Eigen::VectorXd agent_derivative(const AgentModel& model,
                                 const Eigen::Ref<const Eigen::VectorXd>& state,
                                 double u, double t) {
  if (state.size() != model.order) {
    throw DimensionMismatch("agent '" + model.label + "': state has " +
                            std::to_string(state.size()) + " channels, model order is " +
                            std::to_string(model.order));
  }
  const double f = model.drift(state, t, model.mass);
  const double w = model.disturbance(t);
  if (!std::isfinite(f) || !std::isfinite(w)) {
    throw NonFiniteDrift("agent '" + model.label + "': drift or disturbance is not finite at t=" +
                         std::to_string(t));
  }
  return chain(state, f + u + w);
}

Eigen::VectorXd leader_derivative(const LeaderModel& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& state,
                                  double t) {
  if (state.size() != model.order) {
    throw DimensionMismatch("leader: state has " + std::to_string(state.size()) +
                            " channels, model order is " + std::to_string(model.order));
  }
  const double f = model.drift(state, t, model.mass);
  if (!std::isfinite(f)) {
    throw NonFiniteDrift("leader drift is not finite at t=" + std::to_string(t));
  }
  return chain(state, f);
}

double disturbance_eval(const AgentModel& model, double t) { return model.disturbance(t); }

bool validate_initial_bounds(const FleetState& fleet, double x_bound, double x0_bound) {
  for (Eigen::Index i = 0; i < fleet.agents.rows(); ++i) {
    if (!(fleet.agents.row(i).norm() <= x_bound)) return false;
  }
  return fleet.leader.norm() <= x0_bound;
}

BuiltinFleet builtin_fleet() {
  BuiltinFleet fleet;
  const VehicleParameters& p = fleet.parameters;
  fleet.leader = LeaderModel{2, Drift::builtin(Drift::Builtin::kVehicleLeader),
                             p.leader_mass, "leader"};
  const Drift::Builtin ids[] = {Drift::Builtin::kVehicle1, Drift::Builtin::kVehicle2,
                                Drift::Builtin::kVehicle3, Drift::Builtin::kVehicle4,
                                Drift::Builtin::kVehicle5};
  for (size_t i = 0; i < 5; ++i) {
    fleet.agents.push_back(AgentModel{2, Drift::builtin(ids[i]), p.follower_masses[i],
                                      Disturbance::constant(p.follower_disturbance),
                                      "agent" + std::to_string(i + 1)});
  }
  return fleet;
}

}  // namespace consensus_lab
