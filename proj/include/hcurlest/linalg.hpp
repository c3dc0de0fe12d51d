#pragma once

#include "hcurlest/core.hpp"

#include <span>
#include <string>
#include <vector>

namespace hcurlest {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Square sparse matrix in compressed row storage with sorted column
/// indices. Assembled systems are symmetric; the class itself does not
/// enforce it.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Duplicate (row, col) entries are summed.
  static CsrMatrix from_triplets(int n, std::vector<Triplet> triplets);

  int rows() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }

  void multiply(const VectorXd& x, VectorXd& y) const;
  VectorXd operator*(const VectorXd& x) const;

  double coeff(int row, int col) const;
  VectorXd diagonal() const;

  /// max |a_ij - a_ji| / max |a_ij|.
  double symmetry_defect() const;

  /// Rows/columns `keep` (in that order) as a new matrix.
  CsrMatrix principal_submatrix(std::span<const int> keep) const;

  MatrixXd to_dense() const;

  std::span<const int> row_offsets() const { return row_ptr_; }
  std::span<const int> columns() const { return cols_; }
  std::span<const double> values() const { return values_; }

 private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

enum class SolveMode { Exact, Inexact };
enum class Preconditioner { None, Jacobi, SymmetricGaussSeidel };

struct SolveConfig {
  SolveMode mode = SolveMode::Exact;
  double tolerance = 1e-10;
  int max_iterations = 50000;
  /// Step count in INEXACT mode; stands in for a few multigrid V-cycles.
  int inexact_iterations = 10;
  Preconditioner preconditioner = Preconditioner::Jacobi;

  void validate() const;
};

std::string to_string(SolveMode mode);
std::string to_string(Preconditioner p);

struct SolveResult {
  VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients. EXACT mode iterates until
/// ||b - Ax|| <= tol ||b|| and throws NumericalFailure when the iteration cap
/// is hit; INEXACT mode returns the iterate after the configured number of
/// steps. Non-positive curvature throws NumericalFailure.
SolveResult pcg(const CsrMatrix& A, const VectorXd& b, const SolveConfig& config, const VectorXd& x0 = {});

struct SaddleSolution {
  VectorXd primal;
  VectorXd multiplier;
};

/// Solves [[A, B^T], [B, 0]] [x; y] = [f1; f2] by fully pivoted LU.
/// Throws NumericalFailure when the block system is numerically singular.
SaddleSolution dense_saddle_solve(const MatrixXd& A, const MatrixXd& B, const VectorXd& f1, const VectorXd& f2);

/// Same block system with A = diag(blocks), every block SPD. Solved through
/// the Schur complement B A^{-1} B^T, which is SPD iff B has full row rank;
/// rank deficiency throws NumericalFailure. One step of iterative refinement
/// follows, reusing the factors. The block residual is checked
/// against the same 1e-10 relative bound.
SaddleSolution block_saddle_solve(std::span<const MatrixXd> blocks, const MatrixXd& B, const VectorXd& f1,
                                  const VectorXd& f2);

}  // namespace hcurlest
