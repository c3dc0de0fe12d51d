#include "hcurlest/linalg.hpp"

#include <gtest/gtest.h>

#include <Eigen/LU>
#include <Eigen/QR>

#include <random>

using namespace hcurlest;

namespace {

CsrMatrix from_dense(const MatrixXd& A) {
  std::vector<Triplet> t;
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      if (A(i, j) != 0.0) t.push_back({i, j, A(i, j)});
    }
  }
  return CsrMatrix::from_triplets(static_cast<int>(A.rows()), std::move(t));
}

MatrixXd random_spd(int n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) M(i, j) = d(rng);
  }
  return M.transpose() * M + MatrixXd::Identity(n, n);
}

VectorXd random_vector(int n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace

TEST(Csr, DuplicatesAreSummedAndColumnsSorted) {
  const CsrMatrix A = CsrMatrix::from_triplets(3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 3.0}, {2, 1, -1.0}});
  EXPECT_EQ(A.nonzeros(), 3u);
  EXPECT_EQ(A.coeff(0, 2), 4.0);
  EXPECT_EQ(A.coeff(0, 0), 2.0);
  EXPECT_EQ(A.coeff(1, 1), 0.0);
  const auto cols = A.columns();
  EXPECT_LT(cols[0], cols[1]);
  EXPECT_GT(A.symmetry_defect(), 0.0);
}

TEST(Csr, MultiplyAndSubmatrixMatchDense) {
  std::mt19937 rng(5);
  const MatrixXd D = random_spd(12, rng);
  const CsrMatrix A = from_dense(D);
  const VectorXd x = random_vector(12, rng);
  EXPECT_LT((A * x - D * x).norm(), 1e-12 * (D * x).norm());
  EXPECT_LT(A.symmetry_defect(), 1e-15);
  const std::vector<int> keep{7, 2, 9};
  const MatrixXd S = A.principal_submatrix(keep).to_dense();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_EQ(S(i, j), D(keep[i], keep[j]));
  }
  EXPECT_EQ(A.diagonal(), D.diagonal());
}

TEST(Csr, RejectsOutOfRangeEntries) { EXPECT_THROW(CsrMatrix::from_triplets(2, {{0, 2, 1.0}}), InvalidInput); }

TEST(Pcg, IdentityConvergesInOneStep) {
  const CsrMatrix I = from_dense(MatrixXd::Identity(5, 5));
  const VectorXd b = VectorXd::LinSpaced(5, 1.0, 5.0);
  const SolveResult r = pcg(I, b, SolveConfig{});
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LT((r.x - b).norm(), 1e-15);
}

TEST(Pcg, Diagonal) {
  const CsrMatrix A = from_dense(Eigen::Vector3d(1, 2, 3).asDiagonal().toDenseMatrix());
  SolveConfig c;
  c.preconditioner = Preconditioner::None;
  const SolveResult r = pcg(A, Eigen::Vector3d(1, 2, 3), c);
  EXPECT_LT((r.x - Eigen::Vector3d::Ones()).norm(), 1e-12);
}

TEST(Pcg, ZeroRightHandSide) {
  const CsrMatrix I = from_dense(MatrixXd::Identity(3, 3));
  const SolveResult r = pcg(I, VectorXd::Zero(3), SolveConfig{});
  EXPECT_EQ(r.x.norm(), 0.0);
  EXPECT_EQ(r.iterations, 0);
}

class PcgPreconditioner : public ::testing::TestWithParam<Preconditioner> {};

TEST_P(PcgPreconditioner, MatchesDenseFactorization) {
  std::mt19937 rng(6);
  const MatrixXd D = random_spd(50, rng);
  const VectorXd b = random_vector(50, rng);
  SolveConfig c;
  c.preconditioner = GetParam();
  const SolveResult r = pcg(from_dense(D), b, c);
  const VectorXd oracle = D.fullPivLu().solve(b);
  EXPECT_LT((r.x - oracle).norm(), 1e-9 * oracle.norm());
  // tolerance contract of EXACT mode
  EXPECT_LE((b - D * r.x).norm(), c.tolerance * b.norm() * (1 + 1e-6));
  EXPECT_LE(r.relative_residual, c.tolerance);
}

INSTANTIATE_TEST_SUITE_P(All, PcgPreconditioner,
                         ::testing::Values(Preconditioner::None, Preconditioner::Jacobi,
                                           Preconditioner::SymmetricGaussSeidel));

TEST(Pcg, InexactErrorIsMonotoneInEnergyNorm) {
  std::mt19937 rng(8);
  const MatrixXd D = random_spd(40, rng);
  const VectorXd b = random_vector(40, rng);
  const VectorXd oracle = D.ldlt().solve(b);
  const CsrMatrix A = from_dense(D);
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 30; ++k) {
    SolveConfig c;
    c.mode = SolveMode::Inexact;
    c.inexact_iterations = k;
    const SolveResult r = pcg(A, b, c);
    EXPECT_EQ(r.iterations, k);
    const VectorXd e = r.x - oracle;
    const double en = std::sqrt(e.dot(D * e));
    EXPECT_LE(en, last * (1 + 1e-12)) << k;
    last = en;
  }
}

TEST(Pcg, IterationCapThrows) {
  std::mt19937 rng(9);
  const MatrixXd D = random_spd(30, rng);
  SolveConfig c;
  c.max_iterations = 2;
  c.preconditioner = Preconditioner::None;
  EXPECT_THROW(pcg(from_dense(D), random_vector(30, rng), c), NumericalFailure);
}

TEST(Pcg, IndefiniteMatrixThrows) {
  const CsrMatrix A = from_dense(Eigen::Vector2d(1.0, -1.0).asDiagonal().toDenseMatrix());
  SolveConfig c;
  c.preconditioner = Preconditioner::None;
  EXPECT_THROW(pcg(A, Eigen::Vector2d(0.0, 1.0), c), NumericalFailure);
}

TEST(SolveConfig, Validation) {
  SolveConfig c;
  c.tolerance = 1.5;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = SolveConfig{};
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = SolveConfig{};
  c.inexact_iterations = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  EXPECT_NO_THROW(SolveConfig{}.validate());
}

TEST(Saddle, HomogeneousDataGivesZero) {
  const MatrixXd B = (MatrixXd(1, 2) << 1, 0).finished();
  const SaddleSolution s = dense_saddle_solve(MatrixXd::Identity(2, 2), B, VectorXd::Zero(2), VectorXd::Zero(1));
  EXPECT_EQ(s.primal.norm(), 0.0);
  EXPECT_EQ(s.multiplier.norm(), 0.0);
}

TEST(Saddle, HandEliminatedExample) {
  const MatrixXd B = (MatrixXd(1, 2) << 1, 0).finished();
  const SaddleSolution s = dense_saddle_solve(MatrixXd::Identity(2, 2), B, Eigen::Vector2d(1, 1), VectorXd::Zero(1));
  EXPECT_LT((s.primal - Eigen::Vector2d(0, 1)).norm(), 1e-15);
  EXPECT_NEAR(s.multiplier[0], 1.0, 1e-15);
}

TEST(Saddle, RandomSystemMatchesGenericSolver) {
  std::mt19937 rng(10);
  const int n = 30, m = 10;
  const MatrixXd A = random_spd(n, rng);
  MatrixXd B(m, n);
  for (int i = 0; i < m; ++i) B.row(i) = random_vector(n, rng).transpose();
  const VectorXd f1 = random_vector(n, rng), f2 = random_vector(m, rng);
  MatrixXd K = MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = A;
  K.topRightCorner(n, m) = B.transpose();
  K.bottomLeftCorner(m, n) = B;
  VectorXd rhs(n + m);
  rhs << f1, f2;
  const VectorXd oracle = K.colPivHouseholderQr().solve(rhs);
  const SaddleSolution s = dense_saddle_solve(A, B, f1, f2);
  EXPECT_LT((s.primal - oracle.head(n)).norm(), 1e-10 * oracle.norm());
  EXPECT_LT((s.multiplier - oracle.tail(m)).norm(), 1e-10 * oracle.norm());
}

TEST(Saddle, SingularSystemThrows) {
  const MatrixXd B = (MatrixXd(2, 2) << 1, 0, 1, 0).finished();
  EXPECT_THROW(dense_saddle_solve(MatrixXd::Identity(2, 2), B, Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 1)),
               NumericalFailure);
}

TEST(BlockSaddle, MatchesDenseSolve) {
  std::mt19937 rng(12);
  std::vector<MatrixXd> blocks;
  for (int k = 0; k < 4; ++k) blocks.push_back(random_spd(6, rng));
  const int n = 24, m = 9;
  MatrixXd A = MatrixXd::Zero(n, n);
  for (int k = 0; k < 4; ++k) A.block(6 * k, 6 * k, 6, 6) = blocks[k];
  // sparse +-1 rows like the patch constraints
  MatrixXd B = MatrixXd::Zero(m, n);
  for (int i = 0; i < m; ++i) {
    B(i, (5 * i) % n) = 1.0;
    if (i % 2) B(i, (5 * i + 7) % n) = -1.0;
  }
  const VectorXd f1 = random_vector(n, rng), f2 = random_vector(m, rng);
  const SaddleSolution d = dense_saddle_solve(A, B, f1, f2);
  const SaddleSolution s = block_saddle_solve(blocks, B, f1, f2);
  EXPECT_LT((s.primal - d.primal).norm(), 1e-10 * d.primal.norm());
  EXPECT_LT((s.multiplier - d.multiplier).norm(), 1e-10 * d.multiplier.norm());
}

TEST(BlockSaddle, RankDeficientConstraintsThrow) {
  std::mt19937 rng(13);
  const std::vector<MatrixXd> blocks{random_spd(3, rng)};
  const MatrixXd B = (MatrixXd(2, 3) << 1, -1, 0, -1, 1, 0).finished();
  EXPECT_THROW(block_saddle_solve(blocks, B, VectorXd::Ones(3), Eigen::Vector2d(0, 0)), NumericalFailure);
}
