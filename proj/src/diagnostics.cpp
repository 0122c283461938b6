#include "consensus_lab/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "consensus_lab/errors.hpp"
#include "consensus_lab/linalg.hpp"

namespace consensus_lab {

void CuubBounds::validate() const {
  const std::pair<double, const char*> entries[] = {
      {theta_n, "/Theta_n"}, {theta_n0, "/Theta_n0"}, {theta_nw, "/Theta_nw"},
      {phi_n, "/Phi_n"},     {phi_n0, "/Phi_n0"},     {phi_nw, "/Phi_nw"},
      {eps_n, "/eps_n"},     {eps_n0, "/eps_n0"},     {eps_nw, "/eps_nw"},
      {t_m, "/T_M"},         {t_n, "/T_N"},           {kappa, "/kappa"},
      {kappa0, "/kappa0"},   {kappaw, "/kappaw"},
  };
  for (const auto& [v, path] : entries) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(path, "must be >= 0");
  }
  if (!(beta > 0.0)) throw ValidationError("/beta", "must be positive");
  if (!(alpha_bar > 0.0)) throw ValidationError("/alpha_bar", "must be positive");
  if (e0_bound && !(*e0_bound >= 0.0)) throw ValidationError("/e0_bound", "must be >= 0");
}

Eigen::Matrix<double, 5, 5> assemble_k(const KEntries& e) {
  Eigen::Matrix<double, 5, 5> k = Eigen::Matrix<double, 5, 5>::Zero();
  k(0, 0) = e.beta / 2.0;
  k(1, 1) = e.kappa;
  k(2, 2) = e.kappaw;
  k(3, 3) = e.kappa0;
  k(4, 4) = e.mu1;
  k(0, 4) = k(4, 0) = e.g;
  k(1, 4) = k(4, 1) = e.gamma1;
  k(2, 4) = k(4, 2) = e.gamma2;
  k(3, 4) = k(4, 3) = e.gamma3;
  return k;
}

SylvesterReport sylvester_check(const KEntries& e) {
  SylvesterReport rep;
  const double b = e.beta / 2.0;
  rep.minors[0] = b;
  rep.minors[1] = b * e.kappa;
  rep.minors[2] = b * e.kappa * e.kappaw;
  rep.minors[3] = b * e.kappa * e.kappaw * e.kappa0;
  rep.minors[4] = b * e.kappa * e.kappaw * (e.kappa0 * e.mu1 - e.gamma3 * e.gamma3) -
                  b * e.kappa * e.gamma2 * e.gamma2 * e.kappa0 -
                  b * e.gamma1 * e.gamma1 * e.kappaw * e.kappa0 -
                  e.g * e.g * e.kappa * e.kappaw * e.kappa0;
  const double denom = b * e.kappa * e.kappaw * e.kappa0;
  rep.mu1_threshold =
      denom > 0.0 ? (b * e.kappa * e.kappaw * e.gamma3 * e.gamma3 +
                     b * e.kappa * e.gamma2 * e.gamma2 * e.kappa0 +
                     b * e.gamma1 * e.gamma1 * e.kappaw * e.kappa0 +
                     e.g * e.g * e.kappa * e.kappaw * e.kappa0) /
                        denom
                  : std::numeric_limits<double>::infinity();
  for (int i = 0; i < 5; ++i) {
    rep.passed[static_cast<size_t>(i)] = rep.minors[static_cast<size_t>(i)] > 0.0;
    if (!rep.passed[static_cast<size_t>(i)] && !rep.first_failing) rep.first_failing = i + 1;
  }
  return rep;
}

double ultimate_bound_radius(const Eigen::Ref<const Eigen::VectorXd>& omega, double sigma_min_k) {
  return omega.lpNorm<1>() / sigma_min_k;
}

GraphQuantities graph_quantities(const Topology& topology, const GraphLyapunov& lyap,
                                 const ControlGains& gains, double alpha_bar, double e0_bound) {
  GraphQuantities q;
  q.sigma_max_p = lyap.p_diag.cwiseAbs().maxCoeff();
  q.sigma_min_q = sigma_min(lyap.q_matrix);
  q.sigma_max_a = sigma_max(topology.adjacency);
  q.sigma_min_db = pin_degrees(topology).cwiseAbs().minCoeff();
  q.sigma_max_p1 = sigma_max(lyapunov_P1(gains.lambda_bar, alpha_bar));
  q.sigma_max_lp = sigma_max(pinned_laplacian(topology));
  q.lambda_norm = gains.lambda_bar.norm();
  q.delta_frobenius = companion_matrix(gains.lambda_bar).norm();
  q.ce0 = gains.c.norm() * e0_bound;
  return q;
}

DiagnosticsReport cuub_diagnostics(const CuubBounds& bounds, const Topology& topology,
                                   const GraphLyapunov& lyap, const ControlGains& gains,
                                   double e0_bound) {
  bounds.validate();
  DiagnosticsReport rep;
  rep.graph = graph_quantities(topology, lyap, gains, bounds.alpha_bar,
                               bounds.e0_bound.value_or(e0_bound));
  const GraphQuantities& gq = rep.graph;

  const double pa = gq.sigma_max_p * gq.sigma_max_a;
  rep.h = pa / gq.sigma_min_db * gq.lambda_norm;
  KEntries& e = rep.entries;
  e.beta = bounds.beta;
  e.kappa = bounds.kappa;
  e.kappaw = bounds.kappaw;
  e.kappa0 = bounds.kappa0;
  e.g = -0.5 * (pa / gq.sigma_min_db * gq.delta_frobenius * gq.lambda_norm + gq.sigma_max_p1);
  e.gamma1 = -0.5 * bounds.phi_n * pa;
  e.gamma2 = -0.5 * bounds.phi_nw * pa;
  e.gamma3 = -0.5 * bounds.phi_n0 * pa;
  e.mu1 = 0.5 * gq.sigma_min_q - rep.h;
  rep.mu2 = 0.5 * gq.ce0 * gq.sigma_min_q;
  rep.big_lambda = gq.sigma_max_p * gq.sigma_max_lp * (bounds.t_m + bounds.t_n) + rep.mu2;

  rep.k = assemble_k(e);
  rep.sylvester = sylvester_check(e);
  rep.omega << 0.0, bounds.kappa * bounds.theta_n, bounds.kappaw * bounds.theta_nw,
      bounds.kappa0 * bounds.theta_n0, rep.big_lambda;
  rep.omega_l1 = rep.omega.lpNorm<1>();
  rep.sigma_min_k = sigma_min(rep.k);
  rep.b_d = ultimate_bound_radius(rep.omega, rep.sigma_min_k);
  return rep;
}

}  // namespace consensus_lab
