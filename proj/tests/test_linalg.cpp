#include <gtest/gtest.h>

#include <random>

#include "consensus_lab/linalg.hpp"

using namespace consensus_lab;

namespace {

// vec(A^T X + X A) = (I (x) A^T + A^T (x) I) vec(X).
Eigen::MatrixXd kronecker_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const Eigen::Index m = a.rows();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(m * m, m * m);
  const Eigen::MatrixXd at = a.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      big.block(i * m, j * m, m, m) += (i == j ? 1.0 : 0.0) * at;
      big.block(i * m, j * m, m, m) += at(i, j) * Eigen::MatrixXd::Identity(m, m);
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), m * m);
  const Eigen::VectorXd x = big.fullPivLu().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), m, m);
}

}  // namespace

TEST(CompanionMatrix, Layout) {
  const Eigen::Vector3d lambda(2, 3, 4);
  const Eigen::MatrixXd d = companion_matrix(lambda);
  Eigen::MatrixXd expect(3, 3);
  expect << 0, 1, 0, 0, 0, 1, -2, -3, -4;
  EXPECT_EQ(d, expect);
  EXPECT_EQ(companion_matrix(Eigen::VectorXd::Constant(1, 2.0))(0, 0), -2.0);
}

TEST(HurwitzCoefficients, PolynomialExpansion) {
  EXPECT_EQ(hurwitz_coefficients(Eigen::VectorXd::Constant(1, 2.0)), Eigen::VectorXd::Constant(1, 2.0));
  EXPECT_EQ(hurwitz_coefficients(Eigen::Vector2d(1, 2)), Eigen::Vector2d(2, 3));
  EXPECT_EQ(hurwitz_coefficients(Eigen::Vector3d(1, 1, 1)), Eigen::Vector3d(1, 3, 3));
}

TEST(HurwitzCoefficients, RootsAreMinusXi) {
  const Eigen::Vector3d xi(0.5, 1.5, 4.0);
  const Eigen::VectorXd lambda = hurwitz_coefficients(xi);
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion_matrix(lambda));
  std::vector<double> roots;
  for (Eigen::Index k = 0; k < 3; ++k) {
    EXPECT_NEAR(es.eigenvalues()(k).imag(), 0.0, 1e-10);
    roots.push_back(es.eigenvalues()(k).real());
  }
  std::sort(roots.begin(), roots.end());
  EXPECT_NEAR(roots[0], -4.0, 1e-10);
  EXPECT_NEAR(roots[1], -1.5, 1e-10);
  EXPECT_NEAR(roots[2], -0.5, 1e-10);
}

TEST(IsHurwitz, Verdicts) {
  EXPECT_FALSE(is_hurwitz(Eigen::VectorXd::Constant(1, -1.0)));
  EXPECT_TRUE(is_hurwitz(Eigen::Vector2d(2, 3)));
  EXPECT_FALSE(is_hurwitz(Eigen::Vector2d(1, 0)));  // s^2 + 1: roots on the axis
  EXPECT_FALSE(is_hurwitz(Eigen::VectorXd::Constant(1, 0.0)));
}

TEST(ContinuousLyapunov, ScalarClosedForm) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, -2.0);
  const Eigen::MatrixXd x = solve_continuous_lyapunov(a, Eigen::MatrixXd::Identity(1, 1));
  EXPECT_NEAR(x(0, 0), 0.25, 1e-15);
}

TEST(ContinuousLyapunov, MatchesKroneckerOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int m = 1; m <= 5; ++m) {
    Eigen::VectorXd xi(m);
    for (int j = 0; j < m; ++j) xi(j) = u(rng);
    const Eigen::MatrixXd a = companion_matrix(hurwitz_coefficients(xi));
    const Eigen::MatrixXd q = 1.7 * Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd x = solve_continuous_lyapunov(a, q);
    const Eigen::MatrixXd oracle = kronecker_lyapunov(a, q);
    EXPECT_LE((x - oracle).norm(), 1e-9 * std::max(1.0, oracle.norm())) << "m=" << m;
    EXPECT_LE((a.transpose() * x + x * a + q).norm(), 1e-10);
  }
}

TEST(ContinuousLyapunov, NonSymmetricRightHandSide) {
  Eigen::MatrixXd a(2, 2);
  a << -1, 2, 0, -3;
  Eigen::MatrixXd q(2, 2);
  q << 2, 1, 1, 3;
  const Eigen::MatrixXd x = solve_continuous_lyapunov(a, q);
  EXPECT_LE((x - kronecker_lyapunov(a, q)).norm(), 1e-12);
}

TEST(SingularValues, Extremes) {
  Eigen::MatrixXd m(2, 2);
  m << 3, 0, 0, -0.5;
  EXPECT_DOUBLE_EQ(sigma_max(m), 3.0);
  EXPECT_DOUBLE_EQ(sigma_min(m), 0.5);
}

TEST(Templates, WorkInSinglePrecision) {
  const Eigen::Vector2f xi(1.0f, 2.0f);
  const Eigen::VectorXf lambda = hurwitz_coefficients(xi);
  EXPECT_FLOAT_EQ(lambda(0), 2.0f);
  EXPECT_FLOAT_EQ(lambda(1), 3.0f);
  const Eigen::MatrixXf x =
      solve_continuous_lyapunov(companion_matrix(lambda), Eigen::MatrixXf::Identity(2, 2));
  EXPECT_LE((companion_matrix(lambda).transpose() * x + x * companion_matrix(lambda) +
             Eigen::MatrixXf::Identity(2, 2))
                .norm(),
            1e-5f);
}
