#include "consensus_lab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace consensus_lab {

namespace {
constexpr double kPivotTolerance = 1e-12;
constexpr double kPositiveDefiniteTolerance = 1e-10;
}  // namespace

void Topology::validate() const {
  const Eigen::Index n = adjacency.rows();
  if (n < 1) throw ValidationError("/topology/adjacency", "must be non-empty");
  if (adjacency.cols() != n) {
    throw ValidationError("/topology/adjacency", "must be square");
  }
  if (leader_weights.size() != n) {
    throw ValidationError("/topology/leader_weights",
                          "length must equal the number of agents (" +
                              std::to_string(n) + ")");
  }
  if (!adjacency.allFinite() || !leader_weights.allFinite()) {
    throw ValidationError("/topology", "weights must be finite");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) {
      throw ValidationError("/topology/adjacency/" + std::to_string(i) + "/" +
                                std::to_string(i),
                            "diagonal entries must be zero");
    }
    if (leader_weights(i) < 0.0) {
      throw ValidationError("/topology/leader_weights/" + std::to_string(i),
                            "must be nonnegative");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) < 0.0) {
        throw ValidationError("/topology/adjacency/" + std::to_string(i) +
                                  "/" + std::to_string(j),
                              "must be nonnegative");
      }
      if (undirected && adjacency(i, j) != adjacency(j, i)) {
        throw ValidationError("/topology/adjacency/" + std::to_string(i) +
                                  "/" + std::to_string(j),
                              "undirected topology requires a symmetric "
                              "adjacency matrix");
      }
    }
  }
  if (!(nu1 > 0.0)) throw ValidationError("/topology/nu1", "must be positive");
  if (!(nu2 > 0.0)) throw ValidationError("/topology/nu2", "must be positive");
}

Eigen::MatrixXd degree_matrix(const Topology& topology) {
  return degree_from_adjacency(topology.adjacency);
}

Eigen::MatrixXd laplacian(const Topology& topology) {
  return laplacian_from_adjacency(topology.adjacency);
}

Eigen::MatrixXd pinning_matrix(const Topology& topology) {
  return topology.leader_weights.asDiagonal();
}

Eigen::MatrixXd pinned_laplacian(const Topology& topology) {
  return topology.nu1 * laplacian(topology) +
         topology.nu2 * pinning_matrix(topology);
}

Eigen::VectorXd pin_degrees(const Topology& topology) {
  return topology.adjacency.rowwise().sum() + topology.leader_weights;
}

bool has_leader_spanning_tree(const Topology& topology) {
  const Eigen::Index n = topology.size();
  std::vector<bool> reached(static_cast<size_t>(n), false);
  std::deque<Eigen::Index> frontier;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (topology.leader_weights(i) > 0.0) {
      reached[static_cast<size_t>(i)] = true;
      frontier.push_back(i);
    }
  }
  // Information flows j -> i along a_ij > 0.
  while (!frontier.empty()) {
    const Eigen::Index j = frontier.front();
    frontier.pop_front();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!reached[static_cast<size_t>(i)] && topology.adjacency(i, j) > 0.0) {
        reached[static_cast<size_t>(i)] = true;
        frontier.push_back(i);
      }
    }
  }
  return std::all_of(reached.begin(), reached.end(), [](bool r) { return r; });
}

GraphLyapunov graph_lyapunov(const Topology& topology) {
  const Eigen::MatrixXd lp = pinned_laplacian(topology);
  const Eigen::Index n = lp.rows();

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lp);
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double scale = std::max(pivots.maxCoeff(), lp.cwiseAbs().maxCoeff());
  if (!(scale > 0.0) || pivots.minCoeff() <= kPivotTolerance * scale) {
    throw SingularPinnedLaplacian(
        "pinned Laplacian nu1*L + nu2*B is singular: some follower cannot be "
        "reached from the leader");
  }

  GraphLyapunov out;
  out.rcond = lu.rcond();
  out.q = lu.solve(Eigen::VectorXd::Ones(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(out.q(i) > 0.0)) {
      throw NonPositiveQ("q_" + std::to_string(i + 1) + " = " +
                         std::to_string(out.q(i)) + " is not positive");
    }
  }
  out.p_diag = out.q.cwiseInverse();
  const Eigen::MatrixXd p = out.p_diag.asDiagonal();
  out.q_matrix = p * lp + lp.transpose() * p;
  out.q_matrix = (out.q_matrix + out.q_matrix.transpose()) / 2.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.q_matrix,
                                                     Eigen::EigenvaluesOnly);
  out.min_eig_q = eig.eigenvalues()(0);
  Eigen::LLT<Eigen::MatrixXd> llt(out.q_matrix);
  if (llt.info() != Eigen::Success || out.min_eig_q <= kPositiveDefiniteTolerance) {
    throw NonPositiveQ("Q = P Lp + Lp^T P is not positive definite (min "
                       "eigenvalue " +
                       std::to_string(out.min_eig_q) + ")");
  }
  return out;
}

Topology proximity_augment(const Topology& topology,
                           const Eigen::Ref<const Eigen::VectorXd>& first_states,
                           double psi_threshold) {
  if (first_states.size() != topology.size()) {
    throw DimensionMismatch("proximity_augment: one position per agent");
  }
  Topology out = topology;
  const Eigen::Index n = topology.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && std::abs(first_states(i) - first_states(j)) <= psi_threshold) {
        out.adjacency(i, j) = std::max(out.adjacency(i, j), 1.0);
      }
    }
  }
  return out;
}

}  // namespace consensus_lab
