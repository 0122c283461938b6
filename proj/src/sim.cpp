#include "consensus_lab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "consensus_lab/errors.hpp"
#include "consensus_lab/integrator.hpp"

namespace consensus_lab {

NnConfig NnConfig::defaults(int order) {
  NnConfig cfg;
  const Eigen::VectorXd lower = Eigen::VectorXd::Constant(order, -10.0);
  const Eigen::VectorXd upper = Eigen::VectorXd::Constant(order, 10.0);
  const std::vector<int> counts(static_cast<size_t>(order), 5);
  cfg.f_basis = BasisSpec::gaussian_grid(lower, upper, counts, 5.0);
  cfg.leader_basis = cfg.f_basis;
  cfg.w_basis = BasisSpec::fourier_time({2.0, 1.0});
  return cfg;
}

namespace {

std::string agent_path(size_t i) { return "/agents/" + std::to_string(i); }

void validate_basis(const BasisSpec& basis, Eigen::Index order, const std::string& path) {
  if (basis.count() < 1) throw ValidationError(path, "basis must have at least one function");
  if (basis.kind != BasisSpec::Kind::kFourierTime && !(basis.width > 0.0)) {
    throw ValidationError(path + "/width", "must be positive");
  }
  if (basis.kind == BasisSpec::Kind::kGaussianState) {
    for (const auto& c : basis.centers) {
      if (c.size() != order) {
        throw ValidationError(path, "state-basis centers must have " + std::to_string(order) +
                                        " coordinates");
      }
    }
  }
}

}  // namespace

void validate_scenario(const Scenario& s) {
  s.topology.validate();
  const Eigen::Index n_agents = s.topology.size();
  const Eigen::Index order = s.initial.order();
  if (order < 2) throw ValidationError("/order", "chain order must be at least 2");

  if (static_cast<Eigen::Index>(s.agents.size()) != n_agents) {
    throw ValidationError("/agents", "expected " + std::to_string(n_agents) +
                                         " agents to match the adjacency matrix");
  }
  for (size_t i = 0; i < s.agents.size(); ++i) {
    const AgentModel& m = s.agents[i];
    if (m.order != order) {
      throw ValidationError(agent_path(i), "model order differs from the scenario order");
    }
    if (m.drift.required_order() > order) {
      throw ValidationError(agent_path(i) + "/drift", "references a state channel beyond x" +
                                                          std::to_string(order));
    }
    if (!(m.mass > 0.0)) throw ValidationError(agent_path(i) + "/mass", "must be positive");
  }
  if (s.leader.order != order) {
    throw ValidationError("/leader", "model order differs from the scenario order");
  }
  if (s.leader.drift.required_order() > order) {
    throw ValidationError("/leader/drift", "references a state channel beyond x" +
                                               std::to_string(order));
  }
  if (!(s.leader.mass > 0.0)) throw ValidationError("/leader/mass", "must be positive");

  if (!has_leader_spanning_tree(s.topology)) {
    throw ValidationError("/topology/leader_weights",
                          "leader spanning tree missing: some follower cannot be reached "
                          "from the leader");
  }
  const Eigen::VectorXd pins = pin_degrees(s.topology);
  for (Eigen::Index i = 0; i < n_agents; ++i) {
    if (!(pins(i) > 0.0)) {
      throw ValidationError("/topology/adjacency/" + std::to_string(i),
                            "agent has d_i + b_i^0 = 0");
    }
  }

  s.gains.validate(order);

  if (s.offsets.agents.rows() != n_agents || s.offsets.agents.cols() != order) {
    throw ValidationError("/offsets/agents", "expected N x n offsets");
  }
  if (s.offsets.leader.size() != order) {
    throw ValidationError("/offsets/leader", "expected n offsets");
  }
  if (!s.offsets.agents.allFinite() || !s.offsets.leader.allFinite()) {
    throw ValidationError("/offsets", "must be finite");
  }

  validate_basis(s.nn.f_basis, order, "/nn/f_basis");
  validate_basis(s.nn.leader_basis, order, "/nn/leader_basis");
  validate_basis(s.nn.w_basis, order, "/nn/w_basis");
  for (auto [v, path] : {std::pair{s.nn.gain, "/nn/F"}, std::pair{s.nn.gain0, "/nn/F0"},
                         std::pair{s.nn.gainw, "/nn/Fw"}, std::pair{s.nn.kappa, "/nn/kappa"},
                         std::pair{s.nn.kappa0, "/nn/kappa0"},
                         std::pair{s.nn.kappaw, "/nn/kappaw"}}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(path, "must be positive");
  }

  if (s.initial.agents.rows() != n_agents) {
    throw ValidationError("/initial_states/agents", "expected one state per agent");
  }
  if (s.initial.leader.size() != order) {
    throw ValidationError("/initial_states/leader", "expected " + std::to_string(order) +
                                                        " entries");
  }
  if (!s.initial.all_finite()) throw ValidationError("/initial_states", "must be finite");

  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw ValidationError("/sim/dt", "must be positive");
  if (!(s.duration >= 0.0) || !std::isfinite(s.duration)) {
    throw ValidationError("/sim/duration", "must be >= 0");
  }
  if (s.duration > 0.0 && s.dt > s.duration) {
    throw ValidationError("/sim/dt", "must not exceed the duration");
  }
  if (s.record_stride < 1) throw ValidationError("/sim/record_stride", "must be >= 1");

  if (s.x_bound || s.x0_bound) {
    const double xb = s.x_bound.value_or(std::numeric_limits<double>::infinity());
    const double x0b = s.x0_bound.value_or(std::numeric_limits<double>::infinity());
    if (!validate_initial_bounds(s.initial, xb, x0b)) {
      throw ValidationError("/sim/x_bound", "initial states exceed the declared bounds");
    }
  }
}

ClosedLoop::ClosedLoop(Scenario scenario) : scenario_(std::move(scenario)) {
  validate_scenario(scenario_);
  lyap_ = graph_lyapunov(scenario_.topology);
  pin_ = pin_degrees(scenario_.topology);
  layout_.num_agents = scenario_.num_agents();
  layout_.order = scenario_.order();
  layout_.p_agent = scenario_.nn.f_basis.count();
  layout_.p_leader = scenario_.nn.leader_basis.count();
  layout_.p_disturbance = scenario_.nn.w_basis.count();

  const NnConfig& nn = scenario_.nn;
  AgentEstimators proto{LipEstimator::zero(nn.f_basis, nn.gain, nn.kappa),
                        LipEstimator::zero(nn.leader_basis, nn.gain0, nn.kappa0),
                        LipEstimator::zero(nn.w_basis, nn.gainw, nn.kappaw)};
  templates_.assign(static_cast<size_t>(layout_.num_agents), proto);
}

Eigen::VectorXd ClosedLoop::initial_state() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout_.size());
  const Eigen::Index n = layout_.order;
  for (Eigen::Index i = 0; i < layout_.num_agents; ++i) {
    x.segment(i * n, n) = scenario_.initial.agents.row(i).transpose();
  }
  x.segment(layout_.leader_offset(), n) = scenario_.initial.leader;
  return x;
}

ClosedLoopState ClosedLoop::unpack(const Eigen::Ref<const Eigen::VectorXd>& x,
                                   double t) const {
  const Eigen::Index n = layout_.order;
  ClosedLoopState out;
  out.fleet.agents.resize(layout_.num_agents, n);
  for (Eigen::Index i = 0; i < layout_.num_agents; ++i) {
    out.fleet.agents.row(i) = x.segment(i * n, n).transpose();
  }
  out.fleet.leader = x.segment(layout_.leader_offset(), n);
  out.fleet.time = t;
  out.estimators = templates_;
  for (Eigen::Index i = 0; i < layout_.num_agents; ++i) {
    const Eigen::Index w = layout_.agent_weights_offset(i);
    auto& est = out.estimators[static_cast<size_t>(i)];
    est.agent.theta = x.segment(w, layout_.p_agent);
    est.leader.theta = x.segment(w + layout_.p_agent, layout_.p_leader);
    est.disturbance.theta =
        x.segment(w + layout_.p_agent + layout_.p_leader, layout_.p_disturbance);
  }
  return out;
}

Eigen::VectorXd ClosedLoop::operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                                       double t) const {
  if (!x.allFinite()) throw NonFinite("closed-loop state is not finite at t=" + std::to_string(t));
  const Eigen::Index n = layout_.order;
  const Eigen::Index pf = layout_.p_agent;
  const Eigen::Index p0 = layout_.p_leader;
  const Eigen::Index pw = layout_.p_disturbance;

  FleetState fleet;
  fleet.agents.resize(layout_.num_agents, n);
  for (Eigen::Index i = 0; i < layout_.num_agents; ++i) {
    fleet.agents.row(i) = x.segment(i * n, n).transpose();
  }
  fleet.leader = x.segment(layout_.leader_offset(), n);
  fleet.time = t;

  const ErrorSnapshot errors =
      compute_errors(fleet, scenario_.topology, scenario_.offsets, scenario_.gains);
  const NnConfig& nn = scenario_.nn;
  const Eigen::VectorXd phi0 = basis_eval(nn.leader_basis, fleet.leader, t);

  Eigen::VectorXd dx(layout_.size());
  for (Eigen::Index i = 0; i < layout_.num_agents; ++i) {
    const Eigen::VectorXd xi = fleet.agents.row(i).transpose();
    const Eigen::Index w = layout_.agent_weights_offset(i);
    const auto theta = x.segment(w, pf);
    const auto theta0 = x.segment(w + pf, p0);
    const auto thetaw = x.segment(w + pf + p0, pw);
    const Eigen::VectorXd phi = basis_eval(nn.f_basis, xi, t);
    const Eigen::VectorXd phiw = basis_eval(nn.w_basis, xi, t);

    EstimatorOutputs estimates;
    estimates.agent = theta.dot(phi);
    estimates.leader = theta0.dot(phi0);
    estimates.disturbance = thetaw.dot(phiw);
    const double u = control_terms(i, errors, fleet, scenario_.topology, scenario_.gains,
                                   estimates)
                         .total;
    dx.segment(i * n, n) = agent_derivative(scenario_.agents[static_cast<size_t>(i)], xi, u, t);

    const double coupling = errors.r(i) * lyap_.p_diag(i) * pin_(i);
    const auto& est = templates_[static_cast<size_t>(i)];
    dx.segment(w, pf) = tune_agent(est.agent.gain, est.agent.sigma, theta, phi, coupling);
    dx.segment(w + pf, p0) =
        tune_leader(est.leader.gain, est.leader.sigma, theta0, phi0, coupling);
    dx.segment(w + pf + p0, pw) =
        tune_agent(est.disturbance.gain, est.disturbance.sigma, thetaw, phiw, coupling);
  }
  dx.segment(layout_.leader_offset(), n) = leader_derivative(scenario_.leader, fleet.leader, t);
  return dx;
}

double min_pair_distance(const FleetState& fleet) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < fleet.num_agents(); ++i) {
    for (Eigen::Index j = i + 1; j < fleet.num_agents(); ++j) {
      best = std::min(best, std::abs(fleet.agents(i, 0) - fleet.agents(j, 0)));
    }
  }
  return best;
}

double min_obstacle_distance(const FleetState& fleet, const std::vector<double>& obstacles) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < fleet.num_agents(); ++i) {
    for (double omega : obstacles) best = std::min(best, std::abs(fleet.agents(i, 0) - omega));
  }
  return best;
}

namespace {

TraceRecord make_record(const ClosedLoop& loop, const Eigen::VectorXd& x, double t) {
  const Scenario& s = loop.scenario();
  const ClosedLoopState st = loop.unpack(x, t);
  TraceRecord rec;
  rec.t = t;
  rec.state = st.fleet;
  const ErrorSnapshot errors = compute_errors(st.fleet, s.topology, s.offsets, s.gains);
  rec.e = errors.e;
  rec.r = errors.r;
  rec.delta = errors.delta;
  const Eigen::Index n_agents = s.num_agents();
  rec.u.resize(n_agents);
  rec.weight_norms.resize(n_agents, 3);
  for (Eigen::Index i = 0; i < n_agents; ++i) {
    const AgentEstimators& est = st.estimators[static_cast<size_t>(i)];
    rec.u(i) = control_terms(i, errors, st.fleet, s.topology, s.gains, est).total;
    rec.weight_norms(i, 0) = est.agent.theta.norm();
    rec.weight_norms(i, 1) = est.leader.theta.norm();
    rec.weight_norms(i, 2) = est.disturbance.theta.norm();
  }
  rec.min_pair_distance = min_pair_distance(st.fleet);
  rec.min_obstacle_distance = min_obstacle_distance(st.fleet, s.gains.obstacles);
  return rec;
}

double max_weight_norm(const StateLayout& layout, const Eigen::VectorXd& x) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < layout.num_agents; ++i) {
    const Eigen::Index w = layout.agent_weights_offset(i);
    best = std::max({best, x.segment(w, layout.p_agent).norm(),
                     x.segment(w + layout.p_agent, layout.p_leader).norm(),
                     x.segment(w + layout.p_agent + layout.p_leader, layout.p_disturbance)
                         .norm()});
  }
  return best;
}

}  // namespace

Trace run(const Scenario& scenario) {
  const ClosedLoop loop(scenario);
  Trace trace;
  trace.num_agents = scenario.num_agents();
  trace.order = scenario.order();
  trace.t0 = scenario.initial.time;
  trace.duration = scenario.duration;

  const double t0 = scenario.initial.time;
  const double t_end = t0 + scenario.duration;
  const double dt = scenario.dt;
  const long steps =
      scenario.duration > 0.0 ? static_cast<long>(std::ceil(scenario.duration / dt - 1e-9)) : 0;

  Eigen::VectorXd x = loop.initial_state();
  try {
    trace.records.push_back(make_record(loop, x, t0));
  } catch (const Error& err) {
    trace.aborted = std::string("initial state: ") + err.what();
    return trace;
  }

  for (long k = 1; k <= steps; ++k) {
    const double t_prev = t0 + static_cast<double>(k - 1) * dt;
    const double t = k == steps ? t_end : t0 + static_cast<double>(k) * dt;
    try {
      x = rk4_step(loop, x, t_prev, t - t_prev);
    } catch (const Error& err) {
      trace.aborted = err.what();
      break;
    }
    if (!x.allFinite()) {
      trace.aborted = "non-finite state at t=" + std::to_string(t);
      break;
    }
    const double wn = max_weight_norm(loop.layout(), x);
    if (wn > kWeightNormLimit) {
      trace.aborted = "weight norm " + std::to_string(wn) + " exceeded the limit at t=" +
                      std::to_string(t);
      break;
    }
    if (k % scenario.record_stride == 0 || k == steps) {
      try {
        trace.records.push_back(make_record(loop, x, t));
      } catch (const Error& err) {
        trace.aborted = err.what();
        break;
      }
    }
  }
  return trace;
}

Metrics metrics(const Trace& trace) {
  if (trace.records.empty()) throw EmptyTrace("trace has no records");
  const Eigen::Index n_agents = trace.num_agents;
  const Eigen::Index order = trace.order;
  const double t_first = trace.records.front().t;
  const double t_last = trace.records.back().t;
  const double window_start = t_first + (1.0 - kUltimateWindow) * (t_last - t_first);

  Metrics m;
  m.initial_abs_error = trace.records.front().delta.cwiseAbs();
  m.final_abs_error = trace.records.back().delta.cwiseAbs();
  m.peak_abs_error = Eigen::MatrixXd::Zero(n_agents, order);
  m.window_max_error = Eigen::MatrixXd::Zero(n_agents, order);
  m.ultimate_bound = Eigen::VectorXd::Zero(order);
  m.min_pair_distance = std::numeric_limits<double>::infinity();
  m.min_obstacle_distance = std::numeric_limits<double>::infinity();

  for (const TraceRecord& rec : trace.records) {
    const Eigen::MatrixXd abs_delta = rec.delta.cwiseAbs();
    m.peak_abs_error = m.peak_abs_error.cwiseMax(abs_delta);
    if (rec.t >= window_start) {
      m.window_max_error = m.window_max_error.cwiseMax(abs_delta);
      for (Eigen::Index k = 0; k < order; ++k) {
        m.ultimate_bound(k) = std::max(m.ultimate_bound(k), rec.delta.col(k).norm());
      }
    }
    m.min_pair_distance = std::min(m.min_pair_distance, rec.min_pair_distance);
    m.min_obstacle_distance = std::min(m.min_obstacle_distance, rec.min_obstacle_distance);
    for (Eigen::Index i = 0; i < n_agents; ++i) {
      m.max_state_norm = std::max(m.max_state_norm, rec.state.agents.row(i).norm());
    }
    m.max_state_norm = std::max(m.max_state_norm, rec.state.leader.norm());
    m.max_weight_norm = std::max(m.max_weight_norm, rec.weight_norms.maxCoeff());
  }

  // Earliest instant after which ||delta^1|| never exceeds the settling band.
  const double band = kSettlingFactor * m.ultimate_bound(0);
  m.settling_time = t_first;
  for (auto it = trace.records.rbegin(); it != trace.records.rend(); ++it) {
    if (it->delta.col(0).norm() > band) {
      m.settling_time = it == trace.records.rbegin() ? it->t : std::prev(it)->t;
      break;
    }
  }
  return m;
}

}  // namespace consensus_lab
