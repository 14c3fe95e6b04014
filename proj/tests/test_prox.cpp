#include <gtest/gtest.h>

#include <Eigen/SVD>

#include "rtr/prox.hpp"
#include "rtr/rng.hpp"

using namespace rtr;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

double nuclear_norm(const Matrix& m) { return thin_svd(m).singular_values.sum(); }

double svt_objective(const Matrix& x, const Matrix& m, double tau) {
  return tau * nuclear_norm(x) + 0.5 * (x - m).squaredNorm();
}

}  // namespace

TEST(ThinSvd, InvariantsAcrossShapes) {
  // square-ish (direct), tall and wide (QR-reduced paths)
  for (auto [rows, cols] : {std::pair<int, int>{10, 12}, {30, 8}, {8, 30}, {6, 200}}) {
    Matrix m = random_matrix(rows, cols, 1000 + rows * cols);
    SvdResult svd = thin_svd(m);
    const Eigen::Index k = std::min(m.rows(), m.cols());
    ASSERT_EQ(svd.u.cols(), k);
    ASSERT_EQ(svd.v.cols(), k);
    ASSERT_EQ(svd.singular_values.size(), k);
    for (Eigen::Index i = 0; i + 1 < k; ++i)
      EXPECT_GE(svd.singular_values[i], svd.singular_values[i + 1]);
    EXPECT_GE(svd.singular_values[k - 1], 0.0);
    EXPECT_LT((svd.u.transpose() * svd.u - Matrix::Identity(k, k)).norm(), 1e-8);
    EXPECT_LT((svd.v.transpose() * svd.v - Matrix::Identity(k, k)).norm(), 1e-8);
    Matrix rec = svd.u * svd.singular_values.asDiagonal() * svd.v.transpose();
    EXPECT_LT((rec - m).norm() / m.norm(), 1e-8);
  }
}

TEST(ThinSvd, RejectsNonFinite) {
  Matrix m = Matrix::Zero(3, 3);
  m(1, 1) = std::nan("");
  EXPECT_THROW(thin_svd(m), SvdError);
}

TEST(Svt, DiagonalCaseIsAnalytic) {
  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 5, 3, 1;
  Matrix z = svt(m, 2.0);
  Matrix want = Matrix::Zero(3, 3);
  want.diagonal() << 3, 1, 0;
  EXPECT_LT((z - want).norm(), 1e-12);
}

TEST(Svt, LargeTauGivesZero) {
  Matrix m = random_matrix(6, 5, 2);
  const double sigma_max = thin_svd(m).singular_values[0];
  Matrix z = svt(m, sigma_max + 1.0);
  EXPECT_EQ(z.norm(), 0.0);
}

TEST(Svt, SubgradientOptimalityCondition) {
  // If Z = prox_{tau ||.||_*}(M) then (M - Z)/tau must lie in the
  // subdifferential of ||.||_* at Z: it equals U V^T + W with U^T W = 0,
  // W V = 0, ||W||_2 <= 1, for U, V spanning Z's row/column spaces.
  const double tau = 0.5;
  Matrix m = random_matrix(8, 6, 3);
  Matrix z = svt(m, tau);
  Matrix g = (m - z) / tau;

  SvdResult zsvd = thin_svd(z);
  const Eigen::Index r = numerical_rank(zsvd.singular_values);
  ASSERT_GT(r, 0);
  Matrix u = zsvd.u.leftCols(r);
  Matrix v = zsvd.v.leftCols(r);
  Matrix w = g - u * v.transpose();
  EXPECT_LT((u.transpose() * g * v - Matrix::Identity(r, r)).norm(), 1e-8);
  EXPECT_LT((u.transpose() * w).norm(), 1e-8);
  EXPECT_LT((w * v).norm(), 1e-8);
  EXPECT_LE(thin_svd(w).singular_values[0], 1.0 + 1e-8);
}

TEST(Svt, MinimizesProxObjectiveLocally) {
  const double tau = 0.7;
  Matrix m = random_matrix(7, 5, 4);
  Matrix z = svt(m, tau);
  const double at_z = svt_objective(z, m, tau);
  EXPECT_LE(at_z, svt_objective(m, m, tau) + 1e-12);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    Matrix d(7, 5);
    for (Eigen::Index k = 0; k < d.size(); ++k) d.data()[k] = rng.normal();
    d *= 1e-3 / d.norm();
    EXPECT_LE(at_z, svt_objective(z + d, m, tau) + 1e-12);
  }
}

TEST(Svt, NonexpansiveOnRandomPairs) {
  for (int i = 0; i < 20; ++i) {
    Matrix a = random_matrix(6, 9, 100 + i);
    Matrix b = random_matrix(6, 9, 200 + i);
    EXPECT_LE((svt(a, 0.8) - svt(b, 0.8)).norm(), (a - b).norm() + 1e-12);
  }
}

TEST(Svt, SmallTauApproachesInput) {
  Matrix m = random_matrix(5, 5, 6);
  EXPECT_LT((svt(m, 1e-9) - m).norm(), 1e-7);
}

TEST(Svt, RejectsBadTau) {
  Matrix m = Matrix::Identity(2, 2);
  EXPECT_THROW(svt(m, 0.0), std::invalid_argument);
  EXPECT_THROW(svt(m, -1.0), std::invalid_argument);
}

TEST(ColShrink, FormulaOnKnownColumn) {
  Matrix m = Matrix::Zero(3, 2);
  m.col(0) << 0, 2, 0;   // norm 2
  m.col(1) << 0.1, 0, 0; // norm 0.1 < kappa
  Matrix z = col_shrink(m, 0.5);
  EXPECT_NEAR(z(1, 0), 2 * 0.75, 1e-15);
  EXPECT_EQ(z(0, 1), 0.0);
  EXPECT_EQ(z(1, 1), 0.0);
  EXPECT_EQ(z(2, 1), 0.0);
}

TEST(ColShrink, AllColumnsBelowKappaGiveZero) {
  Matrix m = 0.01 * random_matrix(4, 6, 7);
  Matrix z = col_shrink(m, 1.0);
  for (Eigen::Index i = 0; i < z.size(); ++i) EXPECT_EQ(z.data()[i], 0.0);
}

TEST(ColShrink, ExactZeroAtTie) {
  Matrix m = Matrix::Zero(2, 1);
  m(0, 0) = 0.5;  // column norm exactly kappa
  Matrix z = col_shrink(m, 0.5);
  EXPECT_EQ(z(0, 0), 0.0);
}

TEST(ColShrink, MatchesPerColumnOracle) {
  Matrix m = random_matrix(10, 20, 8);
  const double kappa = 1.0;
  Matrix z = col_shrink(m, kappa);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double norm = m.col(j).norm();
    const double scale = std::max(0.0, 1.0 - kappa / norm);
    for (Eigen::Index i = 0; i < m.rows(); ++i) EXPECT_NEAR(z(i, j), scale * m(i, j), 1e-14);
  }
}

TEST(ColShrink, MinimizesGroupProxObjective) {
  Matrix m = random_matrix(6, 8, 9);
  const double kappa = 0.9;
  Matrix z = col_shrink(m, kappa);
  const auto objective = [&](const Matrix& x) {
    return kappa * l21_norm(x) + 0.5 * (x - m).squaredNorm();
  };
  const double at_z = objective(z);
  EXPECT_LE(at_z, objective(m) + 1e-12);
  Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    Matrix d(6, 8);
    for (Eigen::Index k = 0; k < d.size(); ++k) d.data()[k] = rng.normal();
    d *= 1e-3 / d.norm();
    EXPECT_LE(at_z, objective(z + d) + 1e-12);
  }
}

TEST(L1Shrink, ScalarCases) {
  Matrix m(1, 3);
  m << 3.0, -0.5, 1.0;
  Matrix z = l1_shrink(m, 1.0);
  EXPECT_EQ(z(0, 0), 2.0);
  EXPECT_EQ(z(0, 1), 0.0);
  EXPECT_EQ(z(0, 2), 0.0);
}

TEST(L1Shrink, MatchesEntrywiseOracle) {
  Matrix m = random_matrix(9, 7, 11);
  const double kappa = 0.4;
  Matrix z = l1_shrink(m, kappa);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double x = m.data()[i];
    const double want = std::abs(x) <= kappa ? 0.0 : (x > 0 ? x - kappa : x + kappa);
    EXPECT_EQ(z.data()[i], want);
  }
}

TEST(L21Norm, KnownValues) {
  EXPECT_EQ(l21_norm(Matrix::Identity(3, 3)), 3.0);
  EXPECT_EQ(l21_norm(Matrix::Zero(4, 5)), 0.0);
  Matrix m = random_matrix(6, 4, 12);
  double want = 0;
  for (Eigen::Index j = 0; j < 4; ++j) want += m.col(j).norm();
  EXPECT_NEAR(l21_norm(m), want, 1e-12 * want);
}
