#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>

#include "consensus_lab/controller.hpp"
#include "consensus_lab/graph.hpp"

namespace consensus_lab {

/// Graph- and gain-derived quantities entering the ultimate-bound analysis.
struct GraphQuantities {
  double sigma_max_p = 0.0;     // P = diag(1/q)
  double sigma_min_q = 0.0;     // Q = P Lp + Lp^T P
  double sigma_max_a = 0.0;     // adjacency
  double sigma_min_db = 0.0;    // D + B
  double sigma_max_p1 = 0.0;    // companion Lyapunov solution
  double sigma_max_lp = 0.0;    // nu1 L + nu2 B
  double lambda_norm = 0.0;     // ||lambda_bar||
  double delta_frobenius = 0.0; // ||Delta||_F
  double ce0 = 0.0;             // ||c|| * bound on ||E_0||
};

/// User-supplied constants of the boundedness argument. The graph
/// quantities are always recomputed, never read from input.
struct CuubBounds {
  double theta_n = 0.0;
  double theta_n0 = 0.0;
  double theta_nw = 0.0;
  double phi_n = 0.0;
  double phi_n0 = 0.0;
  double phi_nw = 0.0;
  double eps_n = 0.0;
  double eps_n0 = 0.0;
  double eps_nw = 0.0;
  double t_m = 0.0;
  double t_n = 0.0;
  double beta = 1.0;
  double alpha_bar = 1.0;
  double kappa = 0.05;
  double kappa0 = 0.05;
  double kappaw = 0.05;
  /// Bound on ||E_0||; when absent the caller derives one.
  std::optional<double> e0_bound;

  /// Throws ValidationError on a negative entry or beta <= 0.
  void validate() const;
};

/// Entries of the 5x5 arrow matrix
///   [beta/2 0 0 0 g; 0 kappa 0 0 gamma1; 0 0 kappa_w 0 gamma2;
///    0 0 0 kappa_0 gamma3; g gamma1 gamma2 gamma3 mu1].
struct KEntries {
  double beta = 0.0;
  double kappa = 0.0;
  double kappaw = 0.0;
  double kappa0 = 0.0;
  double g = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double mu1 = 0.0;
};

Eigen::Matrix<double, 5, 5> assemble_k(const KEntries& k);

struct SylvesterReport {
  /// Leading principal minors of K, from the arrow-matrix closed forms.
  std::array<double, 5> minors{};
  std::array<bool, 5> passed{};
  /// 1-based index of the first non-positive minor.
  std::optional<int> first_failing;
  /// mu1 must exceed this for the fifth minor to be positive.
  double mu1_threshold = 0.0;
  bool positive_definite() const { return !first_failing.has_value(); }
};

SylvesterReport sylvester_check(const KEntries& k);

/// B_d = ||omega||_1 / sigma_min(K).
double ultimate_bound_radius(const Eigen::Ref<const Eigen::VectorXd>& omega, double sigma_min_k);

struct DiagnosticsReport {
  GraphQuantities graph;
  KEntries entries;
  Eigen::Matrix<double, 5, 5> k;
  SylvesterReport sylvester;
  double h = 0.0;
  double mu2 = 0.0;
  double big_lambda = 0.0;
  Eigen::Matrix<double, 5, 1> omega;
  double omega_l1 = 0.0;
  double sigma_min_k = 0.0;
  double b_d = 0.0;
};

GraphQuantities graph_quantities(const Topology& topology, const GraphLyapunov& lyap,
                                 const ControlGains& gains, double alpha_bar, double e0_bound);

/// Assembles K and omega and evaluates the Sylvester conditions and B_d.
/// A K that is not positive definite is reported, not thrown.
DiagnosticsReport cuub_diagnostics(const CuubBounds& bounds, const Topology& topology,
                                   const GraphLyapunov& lyap, const ControlGains& gains,
                                   double e0_bound);

}  // namespace consensus_lab
