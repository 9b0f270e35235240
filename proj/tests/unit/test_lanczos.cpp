#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

#include "vsa/error.hpp"
#include "vsa/lanczos.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd random_symmetric(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  return 0.5 * (a + a.transpose());
}

vsa::LinearOperator dense_op(const MatrixXd& a) {
  return [&a](const double* x, double* y) {
    Eigen::Map<VectorXd>(y, a.rows()) = a * Eigen::Map<const VectorXd>(x, a.cols());
  };
}

TEST(Lanczos, DiagonalSpectrum) {
  const Eigen::Index n = 300;
  VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = 1.0 / double(i + 1);
  const MatrixXd a = d.asDiagonal();
  vsa::LanczosOptions o;
  o.n_eig = 6;
  const auto r = vsa::lanczos_largest(std::size_t(n), dense_op(a), o);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_NEAR(r.values(i), 1.0 / double(i + 1), 1e-12);
    EXPECT_NEAR(std::abs(r.vectors(i, i)), 1.0, 1e-9);
    EXPECT_LE(r.residuals(i), 1e-10);
  }
}

TEST(Lanczos, MatchesDenseSolver) {
  const auto a = random_symmetric(120, 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  vsa::LanczosOptions o;
  o.n_eig = 8;
  const auto r = vsa::lanczos_largest(120, dense_op(a), o);
  const VectorXd ref = es.eigenvalues().reverse();
  for (Eigen::Index i = 0; i < 8; ++i) {
    EXPECT_NEAR(r.values(i), ref(i), 1e-10);
    const VectorXd v = es.eigenvectors().col(119 - i);
    EXPECT_NEAR(std::abs(v.dot(r.vectors.col(i))), 1.0, 1e-8);
  }
  EXPECT_LE((r.vectors.transpose() * r.vectors - MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(Lanczos, DeterministicGivenSeed) {
  const auto a = random_symmetric(80, 2);
  vsa::LanczosOptions o;
  o.n_eig = 4;
  o.seed = 9;
  const auto r1 = vsa::lanczos_largest(80, dense_op(a), o);
  const auto r2 = vsa::lanczos_largest(80, dense_op(a), o);
  EXPECT_EQ(r1.values, r2.values);
  EXPECT_EQ(r1.vectors, r2.vectors);
}

TEST(Lanczos, LockedVectorIsDeflated) {
  // The top eigenvector is supplied; the solver returns the next ones.
  const auto a = random_symmetric(60, 3);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
  const MatrixXd top = es.eigenvectors().rightCols(1);
  vsa::LanczosOptions o;
  o.n_eig = 3;
  const auto r = vsa::lanczos_largest(60, dense_op(a), o, &top);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(r.values(i), es.eigenvalues()(58 - i), 1e-10);
    EXPECT_NEAR(top.col(0).dot(r.vectors.col(i)), 0.0, 1e-12);
  }
}

TEST(Lanczos, SmallOperatorExhaustsKrylovSpace) {
  MatrixXd a(3, 3);
  a << 2, 1, 0, 1, 2, 0, 0, 0, 0.5;
  vsa::LanczosOptions o;
  o.n_eig = 3;
  const auto r = vsa::lanczos_largest(3, dense_op(a), o);
  EXPECT_NEAR(r.values(0), 3.0, 1e-13);
  EXPECT_NEAR(r.values(1), 1.0, 1e-13);
  EXPECT_NEAR(r.values(2), 0.5, 1e-13);
}

TEST(Lanczos, BudgetExhaustionCarriesResidual) {
  // Tightly clustered spectrum with a tiny budget cannot converge.
  const Eigen::Index n = 400;
  VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = 1.0 - 1e-6 * double(i);
  const MatrixXd a = d.asDiagonal();
  vsa::LanczosOptions o;
  o.n_eig = 10;
  o.max_iter = 40;
  try {
    vsa::lanczos_largest(std::size_t(n), dense_op(a), o);
    ADD_FAILURE() << "expected ConvergenceError";
  } catch (const vsa::ConvergenceError& e) {
    EXPECT_GT(e.worst_residual(), 1e-10);
  }
  o.n_eig = 0;
  EXPECT_THROW(vsa::lanczos_largest(std::size_t(n), dense_op(a), o), vsa::ValidationError);
  o.n_eig = std::size_t(n) + 1;
  EXPECT_THROW(vsa::lanczos_largest(std::size_t(n), dense_op(a), o), vsa::ValidationError);
}

}  // namespace
