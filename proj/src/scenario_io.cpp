#include "consensus_lab/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "consensus_lab/errors.hpp"

namespace consensus_lab {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string join(const std::string& path, size_t index) {
  return path + "/" + std::to_string(index);
}

const json* find(const json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path, "expected an object");
  const json* v = find(obj, key);
  if (v == nullptr) throw ValidationError(join(path, key), "required field missing");
  return *v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(path, "must be finite");
  return d;
}

double number_or(const json& obj, const std::string& key, const std::string& path,
                 double fallback) {
  const json* v = find(obj, key);
  return v ? as_number(*v, join(path, key)) : fallback;
}

std::optional<double> optional_number(const json& obj, const std::string& key,
                                      const std::string& path) {
  const json* v = find(obj, key);
  if (v == nullptr || v->is_null()) return std::nullopt;
  return as_number(*v, join(path, key));
}

bool bool_or(const json& obj, const std::string& key, const std::string& path, bool fallback) {
  const json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) throw ValidationError(join(path, key), "expected true or false");
  return v->get<bool>();
}

std::string string_or(const json& obj, const std::string& key, const std::string& path,
                      const std::string& fallback) {
  const json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) throw ValidationError(join(path, key), "expected a string");
  return v->get<std::string>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& path,
                          std::optional<Eigen::Index> size = std::nullopt) {
  if (!v.is_array()) throw ValidationError(path, "expected an array of numbers");
  if (size && static_cast<Eigen::Index>(v.size()) != *size) {
    throw ValidationError(path, "expected " + std::to_string(*size) + " entries, got " +
                                    std::to_string(v.size()));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = as_number(v[i], join(path, i));
  return out;
}

std::vector<double> as_list(const json& v, const std::string& path) {
  const Eigen::VectorXd vec = as_vector(v, path);
  return {vec.data(), vec.data() + vec.size()};
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& path, Eigen::Index rows,
                          Eigen::Index cols) {
  if (!v.is_array()) throw ValidationError(path, "expected an array of rows");
  if (static_cast<Eigen::Index>(v.size()) != rows) {
    throw ValidationError(path, "expected " + std::to_string(rows) + " rows, got " +
                                    std::to_string(v.size()));
  }
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    out.row(i) = as_vector(v[static_cast<size_t>(i)], join(path, static_cast<size_t>(i)), cols)
                     .transpose();
  }
  return out;
}

// Errors raised below the loader carry no location; attach one.
template <typename F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& err) {
    if (!err.path().empty()) throw;
    throw ValidationError(path, err.what());
  } catch (const DimensionMismatch& err) {
    throw ValidationError(path, err.what());
  }
}

Topology parse_topology(const json& doc, std::optional<double>& proximity) {
  const std::string path = "/topology";
  const json& t = require(doc, "topology", "");
  const json& adj = require(t, "adjacency", path);
  if (!adj.is_array() || adj.empty()) {
    throw ValidationError(path + "/adjacency", "expected a non-empty N x N array");
  }
  const auto n = static_cast<Eigen::Index>(adj.size());
  Topology topo;
  topo.adjacency = as_matrix(adj, path + "/adjacency", n, n);
  topo.leader_weights = as_vector(require(t, "leader_weights", path), path + "/leader_weights", n);
  topo.nu1 = number_or(t, "nu1", path, 1.0);
  topo.nu2 = number_or(t, "nu2", path, 1.0);
  topo.undirected = bool_or(t, "undirected", path, false);
  proximity = optional_number(t, "proximity_threshold", path);
  if (proximity && !(*proximity > 0.0)) {
    throw ValidationError(path + "/proximity_threshold", "must be positive");
  }
  topo.validate();
  return topo;
}

Disturbance parse_disturbance(const json& v, const std::string& path) {
  if (v.is_null()) return Disturbance::zero();
  if (v.is_number()) return Disturbance::constant(as_number(v, path));
  auto from_expression = [&](const std::string& text, const std::string& where) {
    Disturbance d;
    d.kind = Disturbance::Kind::kExpression;
    d.expr = at_path(where, [&] { return Expression::parse(text); });
    if (d.expr.max_channel() > 0) {
      throw ValidationError(where, "a disturbance may depend on t only");
    }
    return d;
  };
  if (v.is_string()) return from_expression(v.get<std::string>(), path);
  if (!v.is_object()) throw ValidationError(path, "expected a number, string or object");
  const std::string type = string_or(v, "type", path, "zero");
  if (type == "zero") return Disturbance::zero();
  if (type == "constant") return Disturbance::constant(as_number(require(v, "value", path), path + "/value"));
  if (type == "sinusoid") {
    return Disturbance::sinusoid(as_number(require(v, "amplitude", path), path + "/amplitude"),
                                 as_number(require(v, "frequency", path), path + "/frequency"),
                                 number_or(v, "phase", path, 0.0));
  }
  if (type == "expression") {
    const json& e = require(v, "expr", path);
    if (!e.is_string()) throw ValidationError(path + "/expr", "expected a string");
    return from_expression(e.get<std::string>(), path + "/expr");
  }
  throw ValidationError(path + "/type", "unknown disturbance type '" + type + "'");
}

Drift parse_drift(const json& obj, const std::string& path) {
  const json* v = find(obj, "drift");
  if (v == nullptr) return Drift::builtin(Drift::Builtin::kZero);
  if (!v->is_string()) throw ValidationError(path + "/drift", "expected a builtin name or expression");
  return at_path(path + "/drift", [&] { return Drift::from_string(v->get<std::string>()); });
}

BasisSpec parse_basis(const json& v, const std::string& path, int order) {
  if (!v.is_object()) throw ValidationError(path, "expected an object");
  const std::string type = string_or(v, "type", path, "gaussian_grid");
  if (type == "gaussian_grid") {
    const Eigen::VectorXd lower =
        find(v, "lower") ? as_vector(v["lower"], path + "/lower", order)
                         : Eigen::VectorXd::Constant(order, -10.0);
    const Eigen::VectorXd upper =
        find(v, "upper") ? as_vector(v["upper"], path + "/upper", order)
                         : Eigen::VectorXd::Constant(order, 10.0);
    std::vector<int> counts(static_cast<size_t>(order), 5);
    if (const json* c = find(v, "counts")) {
      if (c->is_number_integer()) {
        counts.assign(static_cast<size_t>(order), c->get<int>());
      } else {
        const Eigen::VectorXd cv = as_vector(*c, path + "/counts", order);
        for (int k = 0; k < order; ++k) counts[static_cast<size_t>(k)] = static_cast<int>(cv(k));
      }
    }
    for (int c : counts) {
      if (c < 1) throw ValidationError(path + "/counts", "must be >= 1");
    }
    for (int k = 0; k < order; ++k) {
      if (!(lower(k) <= upper(k))) throw ValidationError(path + "/lower", "must not exceed upper");
    }
    const double width = number_or(v, "width", path, 5.0);
    if (!(width > 0.0)) throw ValidationError(path + "/width", "must be positive");
    return BasisSpec::gaussian_grid(lower, upper, counts, width);
  }
  if (type == "gaussian_time") {
    const double width = number_or(v, "width", path, 1.0);
    if (!(width > 0.0)) throw ValidationError(path + "/width", "must be positive");
    return BasisSpec::gaussian_time(as_list(require(v, "centers", path), path + "/centers"), width);
  }
  if (type == "fourier_time") {
    return BasisSpec::fourier_time(
        as_list(require(v, "frequencies", path), path + "/frequencies"));
  }
  throw ValidationError(path + "/type", "unknown basis type '" + type + "'");
}

NnConfig parse_nn(const json& doc, int order) {
  NnConfig nn = NnConfig::defaults(order);
  const json* v = find(doc, "nn");
  if (v == nullptr) return nn;
  const std::string path = "/nn";
  if (!v->is_object()) throw ValidationError(path, "expected an object");
  if (const json* b = find(*v, "f_basis")) {
    nn.f_basis = parse_basis(*b, path + "/f_basis", order);
    nn.leader_basis = nn.f_basis;
  }
  if (const json* b = find(*v, "leader_basis")) {
    nn.leader_basis = parse_basis(*b, path + "/leader_basis", order);
  }
  if (const json* b = find(*v, "w_basis")) nn.w_basis = parse_basis(*b, path + "/w_basis", order);
  nn.gain = number_or(*v, "F", path, nn.gain);
  nn.gain0 = number_or(*v, "F0", path, nn.gain);
  nn.gainw = number_or(*v, "Fw", path, nn.gain);
  nn.kappa = number_or(*v, "kappa", path, nn.kappa);
  nn.kappa0 = number_or(*v, "kappa0", path, nn.kappa);
  nn.kappaw = number_or(*v, "kappaw", path, nn.kappa);
  return nn;
}

ControlGains parse_gains(const json& doc, int order) {
  const std::string path = "/gains";
  const json& g = require(doc, "gains", "");
  if (!g.is_object()) throw ValidationError(path, "expected an object");
  ControlGains gains;
  const json* xi = find(g, "lambda_xi");
  const json* lb = find(g, "lambda_bar");
  if (xi && lb) throw ValidationError(path, "give either lambda_xi or lambda_bar, not both");
  if (xi) {
    const Eigen::VectorXd roots = as_vector(*xi, path + "/lambda_xi", order - 1);
    gains.lambda_bar = hurwitz_lambda(roots);
  } else if (lb) {
    gains.lambda_bar = as_vector(*lb, path + "/lambda_bar", order - 1);
  } else {
    throw ValidationError(path + "/lambda_xi", "required field missing");
  }
  gains.c = as_vector(require(g, "c", path), path + "/c", order);
  gains.gamma0 = number_or(g, "gamma0", path, 0.0);
  gains.gamma1 = number_or(g, "gamma1", path, 0.0);
  gains.gamma2 = number_or(g, "gamma2", path, 0.0);
  gains.chi = number_or(g, "chi", path, gains.chi);
  gains.psi_ij = number_or(g, "psi_ij", path, gains.psi_ij);
  gains.psi_i0 = number_or(g, "psi_i0", path, gains.psi_i0);
  gains.detect_radius = number_or(g, "R", path, gains.detect_radius);
  gains.obstacle_radius = number_or(g, "core_radius", path, gains.obstacle_radius);
  gains.alpha_bar = number_or(g, "alpha_bar", path, gains.alpha_bar);
  if (const json* obs = find(doc, "obstacles")) gains.obstacles = as_list(*obs, "/obstacles");
  gains.strict_decentralized = bool_or(doc, "strict_decentralized", "", false);
  const std::string dir = string_or(doc, "avoidance_direction", "", "repulsive");
  if (dir == "repulsive") {
    gains.direction = AvoidanceDirection::kRepulsive;
  } else if (dir == "signless") {
    gains.direction = AvoidanceDirection::kSignless;
  } else {
    throw ValidationError("/avoidance_direction", "expected \"repulsive\" or \"signless\"");
  }
  return gains;
}

int infer_order(const json& doc) {
  if (const json* o = find(doc, "order")) {
    if (!o->is_number_integer()) throw ValidationError("/order", "expected an integer");
    return o->get<int>();
  }
  const json* init = find(doc, "initial_states");
  if (init && init->is_object()) {
    const json* leader = find(*init, "leader");
    if (leader && leader->is_array()) return static_cast<int>(leader->size());
  }
  return 2;
}

}  // namespace

CuubBounds bounds_from_json(const json& doc, const std::string& path) {
  if (!doc.is_object()) throw ValidationError(path, "expected an object");
  CuubBounds b;
  const std::pair<const char*, double*> fields[] = {
      {"Theta_n", &b.theta_n}, {"Theta_n0", &b.theta_n0}, {"Theta_nw", &b.theta_nw},
      {"Phi_n", &b.phi_n},     {"Phi_n0", &b.phi_n0},     {"Phi_nw", &b.phi_nw},
      {"eps_n", &b.eps_n},     {"eps_n0", &b.eps_n0},     {"eps_nw", &b.eps_nw},
      {"T_M", &b.t_m},         {"T_N", &b.t_n},           {"beta", &b.beta},
      {"alpha_bar", &b.alpha_bar}, {"kappa", &b.kappa},   {"kappa0", &b.kappa0},
      {"kappaw", &b.kappaw},
  };
  for (const auto& [key, dst] : fields) *dst = number_or(doc, key, path, *dst);
  b.e0_bound = optional_number(doc, "e0_bound", path);
  try {
    b.validate();
  } catch (const ValidationError& err) {
    throw ValidationError(path + err.path(), std::string(err.what()).substr(err.path().size() + 2));
  }
  return b;
}

ScenarioFile scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("", "scenario must be a JSON object");
  const json& schema = require(doc, "schema", "");
  if (!schema.is_number_integer() || schema.get<int>() != kScenarioSchema) {
    throw ValidationError("/schema", "unsupported schema version (expected " +
                                         std::to_string(kScenarioSchema) + ")");
  }
  ScenarioFile file;
  Scenario& s = file.scenario;
  s.name = string_or(doc, "name", "", "scenario");
  const int order = infer_order(doc);
  if (order < 2) throw ValidationError("/order", "chain order must be at least 2");

  s.topology = parse_topology(doc, file.proximity_threshold);
  const Eigen::Index n_agents = s.topology.size();

  const json& agents = require(doc, "agents", "");
  if (!agents.is_array()) throw ValidationError("/agents", "expected an array");
  for (size_t i = 0; i < agents.size(); ++i) {
    const std::string path = join("/agents", i);
    const json& a = agents[i];
    if (!a.is_object()) throw ValidationError(path, "expected an object");
    AgentModel m;
    m.order = order;
    m.label = string_or(a, "label", path, "agent" + std::to_string(i + 1));
    m.drift = parse_drift(a, path);
    m.mass = number_or(a, "mass", path, 1.0);
    if (const json* d = find(a, "disturbance")) m.disturbance = parse_disturbance(*d, path + "/disturbance");
    s.agents.push_back(std::move(m));
  }

  const json& leader = require(doc, "leader", "");
  if (!leader.is_object()) throw ValidationError("/leader", "expected an object");
  s.leader.order = order;
  s.leader.label = string_or(leader, "label", "/leader", "leader");
  s.leader.drift = parse_drift(leader, "/leader");
  s.leader.mass = number_or(leader, "mass", "/leader", 1.0);

  s.gains = parse_gains(doc, order);

  s.offsets = Offsets::zero(n_agents, order);
  if (const json* off = find(doc, "offsets")) {
    if (const json* a = find(*off, "agents")) {
      s.offsets.agents = as_matrix(*a, "/offsets/agents", n_agents, order);
    }
    if (const json* l = find(*off, "leader")) s.offsets.leader = as_vector(*l, "/offsets/leader", order);
  }

  s.nn = parse_nn(doc, order);

  const json& init = require(doc, "initial_states", "");
  s.initial.agents = as_matrix(require(init, "agents", "/initial_states"),
                               "/initial_states/agents", n_agents, order);
  s.initial.leader = as_vector(require(init, "leader", "/initial_states"),
                               "/initial_states/leader", order);

  if (const json* sim = find(doc, "sim")) {
    if (!sim->is_object()) throw ValidationError("/sim", "expected an object");
    s.initial.time = number_or(*sim, "t0", "/sim", 0.0);
    s.dt = number_or(*sim, "dt", "/sim", s.dt);
    s.duration = number_or(*sim, "duration", "/sim", s.duration);
    if (const json* stride = find(*sim, "record_stride")) {
      if (!stride->is_number_integer()) throw ValidationError("/sim/record_stride", "expected an integer");
      s.record_stride = stride->get<int>();
    }
    if (const json* seed = find(*sim, "seed")) {
      if (!seed->is_number_unsigned()) throw ValidationError("/sim/seed", "expected a non-negative integer");
      s.seed = seed->get<std::uint64_t>();
    }
    s.x_bound = optional_number(*sim, "x_bound", "/sim");
    s.x0_bound = optional_number(*sim, "x0_bound", "/sim");
  }

  if (file.proximity_threshold) {
    s.topology = proximity_augment(s.topology, s.initial.agents.col(0), *file.proximity_threshold);
  }
  if (const json* b = find(doc, "bounds")) file.bounds = bounds_from_json(*b, "/bounds");
  return file;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    throw ValidationError("", path + ": " + err.what());
  }
}

std::optional<int> locate_line(const std::string& text, const std::string& pointer) {
  // Walk the pointer's object keys, searching forward for each quoted key.
  size_t pos = 0;
  bool found = false;
  std::stringstream ss(pointer);
  std::string token;
  while (std::getline(ss, token, '/')) {
    if (token.empty()) continue;
    const bool index = token.find_first_not_of("0123456789") == std::string::npos;
    if (index) continue;
    const size_t hit = text.find("\"" + token + "\"", pos);
    if (hit == std::string::npos) break;
    pos = hit;
    found = true;
  }
  if (!found) return std::nullopt;
  int line = 1;
  for (size_t i = 0; i < pos; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

ScenarioFile load_scenario_text(const std::string& text, const std::string& source,
                                bool validate) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    // byte is 1-based and points just past the offending character.
    int line = 1;
    int column = 0;
    const size_t end = std::min(err.byte == 0 ? 0 : err.byte - 1, text.size());
    for (size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 0;
      } else {
        ++column;
      }
    }
    throw ValidationError("", source + ":" + std::to_string(line) + ":" +
                                  std::to_string(column + 1) + ": JSON parse error: " +
                                  err.what());
  }
  try {
    ScenarioFile file = scenario_from_json(doc);
    if (validate) validate_scenario(file.scenario);
    return file;
  } catch (const ValidationError& err) {
    const auto line = locate_line(text, err.path());
    if (!line) throw ValidationError::located(source, err);
    throw ValidationError::located(source + ":" + std::to_string(*line), err);
  }
}

ScenarioFile load_scenario_file(const std::string& path, bool validate) {
  std::ifstream in(path);
  if (!in) throw ValidationError("", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario_text(buf.str(), path, validate);
}

std::optional<std::string> sweep_pointer(const std::string& name) {
  if (!name.empty() && name.front() == '/') return name;
  static const std::map<std::string, std::string> table = {
      {"kappa", "/nn/kappa"},
      {"kappa0", "/nn/kappa0"},
      {"kappaw", "/nn/kappaw"},
      {"F", "/nn/F"},
      {"F0", "/nn/F0"},
      {"Fw", "/nn/Fw"},
      {"gamma0", "/gains/gamma0"},
      {"gamma1", "/gains/gamma1"},
      {"gamma2", "/gains/gamma2"},
      {"chi", "/gains/chi"},
      {"psi_ij", "/gains/psi_ij"},
      {"psi_i0", "/gains/psi_i0"},
      {"R", "/gains/R"},
      {"core_radius", "/gains/core_radius"},
      {"alpha_bar", "/gains/alpha_bar"},
      {"nu1", "/topology/nu1"},
      {"nu2", "/topology/nu2"},
      {"dt", "/sim/dt"},
      {"duration", "/sim/duration"},
      {"seed", "/sim/seed"},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

}  // namespace consensus_lab
