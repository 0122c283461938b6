#pragma once

// Dense linear-algebra kernels shared by the graph, controller and
// diagnostics modules. Everything here is templated on the scalar type and
// accepts Eigen expressions.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <string>

#include "consensus_lab/errors.hpp"

namespace consensus_lab {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// diag(d_1..d_N) with d_i the i-th row sum of the adjacency matrix.
template <typename Derived>
MatrixX<typename Derived::Scalar> degree_from_adjacency(
    const Eigen::MatrixBase<Derived>& adjacency) {
  return adjacency.rowwise().sum().asDiagonal();
}

/// L = D - A.
template <typename Derived>
MatrixX<typename Derived::Scalar> laplacian_from_adjacency(
    const Eigen::MatrixBase<Derived>& adjacency) {
  return degree_from_adjacency(adjacency) - adjacency;
}

/// Companion matrix with ones on the superdiagonal and last row
/// -lambda_1 .. -lambda_{m}. Its characteristic polynomial is
/// s^m + lambda_m s^{m-1} + ... + lambda_1.
template <typename Derived>
MatrixX<typename Derived::Scalar> companion_matrix(
    const Eigen::MatrixBase<Derived>& lambda_bar) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = lambda_bar.size();
  MatrixX<Scalar> delta = MatrixX<Scalar>::Zero(m, m);
  for (Eigen::Index i = 0; i + 1 < m; ++i) delta(i, i + 1) = Scalar(1);
  if (m > 0) delta.row(m - 1) = -lambda_bar.transpose();
  return delta;
}

/// Coefficients of prod_j (s + xi_j), lowest order first and without the
/// leading one: returns (lambda_1, ..., lambda_m).
template <typename Derived>
VectorX<typename Derived::Scalar> hurwitz_coefficients(
    const Eigen::MatrixBase<Derived>& xi) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = xi.size();
  // poly(k) is the coefficient of s^k; starts as the constant 1.
  VectorX<Scalar> poly = VectorX<Scalar>::Zero(m + 1);
  poly(0) = Scalar(1);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = j + 1; k > 0; --k) {
      poly(k) = poly(k - 1) + xi(j) * poly(k);
    }
    poly(0) *= xi(j);
  }
  return poly.head(m);
}

/// True iff every eigenvalue of the companion matrix has real part below
/// -margin.
template <typename Derived>
bool is_hurwitz(const Eigen::MatrixBase<Derived>& lambda_bar,
                typename Derived::Scalar margin = 1e-12) {
  using Scalar = typename Derived::Scalar;
  if (lambda_bar.size() == 0) return false;
  if (!lambda_bar.allFinite()) return false;
  const MatrixX<Scalar> delta = companion_matrix(lambda_bar);
  Eigen::EigenSolver<MatrixX<Scalar>> solver(delta, false);
  if (solver.info() != Eigen::Success) return false;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    if (!(solver.eigenvalues()(i).real() < -margin)) return false;
  }
  return true;
}

/// Solves A^T X + X A + Q = 0 for X by a complex Schur reduction of A
/// followed by column-wise triangular back substitution. Requires
/// conj(lambda_i) + lambda_j != 0 for every eigenvalue pair of A.
template <typename DerivedA, typename DerivedQ>
MatrixX<typename DerivedA::Scalar> solve_continuous_lyapunov(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedA::Scalar;
  using Complex = std::complex<Scalar>;
  using ComplexMatrix = MatrixX<Complex>;
  if (a.rows() != a.cols() || q.rows() != q.cols() || a.rows() != q.rows()) {
    throw DimensionMismatch(
        "solve_continuous_lyapunov: A and Q must be square and of equal size");
  }
  const Eigen::Index m = a.rows();
  Eigen::ComplexSchur<MatrixX<Scalar>> schur(a.eval());
  if (schur.info() != Eigen::Success) {
    throw Error("solve_continuous_lyapunov: Schur factorization failed");
  }
  const ComplexMatrix& u = schur.matrixU();
  const ComplexMatrix& t = schur.matrixT();
  // With A = U T U^*, the equation becomes T^* Y + Y T = -U^* Q U.
  const ComplexMatrix c = -(u.adjoint() * q.template cast<Complex>() * u);
  const ComplexMatrix t_adj = t.adjoint();
  ComplexMatrix y = ComplexMatrix::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    VectorX<Complex> rhs = c.col(j);
    for (Eigen::Index k = 0; k < j; ++k) rhs -= y.col(k) * t(k, j);
    ComplexMatrix lower = t_adj;
    lower.diagonal().array() += t(j, j);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::abs(lower(i, i)) <= Scalar(1e-14)) {
        throw Error("solve_continuous_lyapunov: solution is not unique");
      }
    }
    y.col(j) =
        lower.template triangularView<Eigen::Lower>().solve(rhs);
  }
  const MatrixX<Scalar> x = (u * y * u.adjoint()).real();
  // A symmetric Q has a symmetric solution; remove rounding asymmetry.
  if (q == q.transpose()) return (x + x.transpose()) / Scalar(2);
  return x;
}

template <typename Derived>
typename Derived::Scalar sigma_max(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return typename Derived::Scalar(0);
  Eigen::JacobiSVD<MatrixX<typename Derived::Scalar>> svd(m.eval());
  return svd.singularValues()(0);
}

template <typename Derived>
typename Derived::Scalar sigma_min(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return typename Derived::Scalar(0);
  Eigen::JacobiSVD<MatrixX<typename Derived::Scalar>> svd(m.eval());
  return svd.singularValues()(svd.singularValues().size() - 1);
}

}  // namespace consensus_lab
