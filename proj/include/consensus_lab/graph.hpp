#pragma once

#include <Eigen/Dense>

#include "consensus_lab/linalg.hpp"

namespace consensus_lab {

/// Follower communication graph plus leader pinning.
///
/// `adjacency(i, j) > 0` means agent i receives the state of agent j.
/// `leader_weights(i) > 0` means agent i receives the leader state.
struct Topology {
  Eigen::MatrixXd adjacency;
  Eigen::VectorXd leader_weights;
  double nu1 = 1.0;
  double nu2 = 1.0;
  bool undirected = true;

  Eigen::Index size() const { return adjacency.rows(); }

  /// Throws ValidationError when the structural invariants are violated:
  /// square nonnegative adjacency with zero diagonal, matching pinning
  /// vector, symmetry when `undirected`, and positive coupling gains.
  /// Leader reachability is checked separately by has_leader_spanning_tree.
  void validate() const;
};

/// Lyapunov data for the pinned Laplacian: q = (nu1 L + nu2 B)^{-1} 1,
/// P = diag(1/q_i), Q = P Lp + Lp^T P.
struct GraphLyapunov {
  Eigen::VectorXd q;
  Eigen::VectorXd p_diag;
  Eigen::MatrixXd q_matrix;
  double min_eig_q = 0.0;
  /// Reciprocal condition estimate of the pinned Laplacian from the LU.
  double rcond = 0.0;
};

Eigen::MatrixXd degree_matrix(const Topology& topology);
Eigen::MatrixXd laplacian(const Topology& topology);
/// diag(b_1^0 .. b_N^0).
Eigen::MatrixXd pinning_matrix(const Topology& topology);
/// nu1 * L + nu2 * B.
Eigen::MatrixXd pinned_laplacian(const Topology& topology);
/// d_i + b_i^0 for each agent.
Eigen::VectorXd pin_degrees(const Topology& topology);

/// Every follower is reachable from the leader in the augmented graph.
bool has_leader_spanning_tree(const Topology& topology);

/// Throws SingularPinnedLaplacian when the LU pivots fall below a relative
/// tolerance of 1e-12, NonPositiveQ when q or Q fail positivity.
GraphLyapunov graph_lyapunov(const Topology& topology);

/// Connects (weight max(a_ij, 1)) every pair with |x_i - x_j| <= psi.
Topology proximity_augment(const Topology& topology,
                           const Eigen::Ref<const Eigen::VectorXd>& first_states,
                           double psi_threshold);

}  // namespace consensus_lab
