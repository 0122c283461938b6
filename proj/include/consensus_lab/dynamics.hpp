#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "consensus_lab/expression.hpp"

namespace consensus_lab {

/// Gravity used by the built-in vehicle models.
inline constexpr double kGravity = 9.81;

/// Road grade alpha(s) = 0.05 sin(0.1 s) of the built-in vehicle models.
inline double road_grade(double s) { return 0.05 * std::sin(0.1 * s); }

/// Nonlinear drift of the last chain channel: either a hard-coded builtin or
/// a parsed expression of (state, t, m).
class Drift {
 public:
  enum class Builtin {
    kZero,
    kVehicle1,
    kVehicle2,
    kVehicle3,
    kVehicle4,
    kVehicle5,
    kVehicleLeader,
  };

  Drift() = default;
  static Drift builtin(Builtin which) {
    Drift d;
    d.builtin_ = which;
    return d;
  }
  static Drift expression(Expression expr) {
    Drift d;
    d.expr_ = std::move(expr);
    d.is_expression_ = true;
    return d;
  }
  /// Accepts a builtin name ("zero", "vehicle1".."vehicle5",
  /// "vehicle_leader") or an expression string.
  static Drift from_string(const std::string& text);

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& state, double t,
                    double mass) const;

  /// Minimum chain order the drift needs.
  int required_order() const;
  /// Builtin name or expression text.
  std::string describe() const;
  bool is_expression() const { return is_expression_; }

 private:
  Builtin builtin_ = Builtin::kZero;
  Expression expr_;
  bool is_expression_ = false;
};

/// Additive disturbance w_i(t) on the last channel.
struct Disturbance {
  enum class Kind { kZero, kConstant, kSinusoid, kExpression };
  Kind kind = Kind::kZero;
  double value = 0.0;      // constant
  double amplitude = 0.0;  // sinusoid: amplitude * sin(frequency * t + phase)
  double frequency = 0.0;
  double phase = 0.0;
  Expression expr;  // function of t

  static Disturbance zero() { return {}; }
  static Disturbance constant(double v) {
    Disturbance d;
    d.kind = Kind::kConstant;
    d.value = v;
    return d;
  }
  static Disturbance sinusoid(double amplitude, double frequency, double phase = 0.0) {
    Disturbance d;
    d.kind = Kind::kSinusoid;
    d.amplitude = amplitude;
    d.frequency = frequency;
    d.phase = phase;
    return d;
  }

  double operator()(double t) const;
};

struct AgentModel {
  int order = 2;
  Drift drift;
  double mass = 1.0;
  Disturbance disturbance;
  std::string label;
};

struct LeaderModel {
  int order = 2;
  Drift drift;
  double mass = 1.0;
  std::string label;
};

/// Raw states: row i of `agents` is x_i, column k is the global x^{k+1}.
struct FleetState {
  Eigen::MatrixXd agents;
  Eigen::VectorXd leader;
  double time = 0.0;

  Eigen::Index num_agents() const { return agents.rows(); }
  Eigen::Index order() const { return agents.cols(); }
  bool all_finite() const {
    return agents.allFinite() && leader.allFinite() && std::isfinite(time);
  }
};

/// [x2, ..., xn, f_i(x) + u + w_i(t)]. Throws NonFiniteDrift.
Eigen::VectorXd agent_derivative(const AgentModel& model,
                                 const Eigen::Ref<const Eigen::VectorXd>& state,
                                 double u, double t);

/// [x2, ..., xn, f_0(x, t)]. Throws NonFiniteDrift.
Eigen::VectorXd leader_derivative(const LeaderModel& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& state,
                                  double t);

double disturbance_eval(const AgentModel& model, double t);

/// ||x_i(t0)|| <= x_bound for every follower and ||x_0(t0)|| <= x0_bound.
bool validate_initial_bounds(const FleetState& fleet, double x_bound, double x0_bound);

/// Parameters of the built-in five-vehicle example.
struct VehicleParameters {
  double leader_mass = 2000.0;
  std::vector<double> follower_masses{1200.0, 1100.0, 1500.0, 1400.0, 1500.0};
  double gravity = kGravity;
  double grade_amplitude = 0.05;
  double grade_frequency = 0.1;
  double follower_disturbance = 5.0;
};

struct BuiltinFleet {
  LeaderModel leader;
  std::vector<AgentModel> agents;
  VehicleParameters parameters;
};

/// Leader plus five heterogeneous second-order vehicle followers.
BuiltinFleet builtin_fleet();

}  // namespace consensus_lab
