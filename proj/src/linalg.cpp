#include "hcurlest/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace hcurlest {

CsrMatrix CsrMatrix::from_triplets(int n, std::vector<Triplet> triplets) {
  if (n < 0) throw InvalidInput("matrix dimension must be non-negative");
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  CsrMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(n + 1, 0);
  int last_row = -1;
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) throw InvalidInput("triplet index out of range");
    if (!m.cols_.empty() && last_row == t.row && m.cols_.back() == t.col) {
      m.values_.back() += t.value;
      continue;
    }
    m.cols_.push_back(t.col);
    m.values_.push_back(t.value);
    last_row = t.row;
    ++m.row_ptr_[t.row + 1];
  }
  for (int i = 0; i < n; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  return m;
}

void CsrMatrix::multiply(const VectorXd& x, VectorXd& y) const {
  y.resize(n_);
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
    y[i] = s;
  }
}

VectorXd CsrMatrix::operator*(const VectorXd& x) const {
  VectorXd y;
  multiply(x, y);
  return y;
}

double CsrMatrix::coeff(int row, int col) const {
  const auto first = cols_.begin() + row_ptr_[row];
  const auto last = cols_.begin() + row_ptr_[row + 1];
  const auto it = std::lower_bound(first, last, col);
  return (it != last && *it == col) ? values_[it - cols_.begin()] : 0.0;
}

VectorXd CsrMatrix::diagonal() const {
  VectorXd d(n_);
  for (int i = 0; i < n_; ++i) d[i] = coeff(i, i);
  return d;
}

double CsrMatrix::symmetry_defect() const {
  double scale = 0.0;
  double defect = 0.0;
  for (int i = 0; i < n_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      scale = std::max(scale, std::abs(values_[k]));
      defect = std::max(defect, std::abs(values_[k] - coeff(cols_[k], i)));
    }
  }
  return scale > 0 ? defect / scale : 0.0;
}

CsrMatrix CsrMatrix::principal_submatrix(std::span<const int> keep) const {
  std::vector<int> map(n_, -1);
  for (std::size_t i = 0; i < keep.size(); ++i) map[keep[i]] = static_cast<int>(i);
  CsrMatrix m;
  m.n_ = static_cast<int>(keep.size());
  m.row_ptr_.assign(m.n_ + 1, 0);
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < m.n_; ++i) {
    const int r = keep[i];
    row.clear();
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (map[cols_[k]] >= 0) row.emplace_back(map[cols_[k]], values_[k]);
    }
    std::sort(row.begin(), row.end());
    for (const auto& [c, v] : row) {
      m.cols_.push_back(c);
      m.values_.push_back(v);
    }
    m.row_ptr_[i + 1] = static_cast<int>(m.cols_.size());
  }
  return m;
}

MatrixXd CsrMatrix::to_dense() const {
  MatrixXd d = MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, cols_[k]) += values_[k];
  }
  return d;
}

void SolveConfig::validate() const {
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw InvalidInput("solver tolerance must lie in (0, 1)");
  if (max_iterations < 1) throw InvalidInput("solver max_iterations must be >= 1");
  if (inexact_iterations < 1) throw InvalidInput("solver inexact_iterations must be >= 1");
}

std::string to_string(SolveMode mode) { return mode == SolveMode::Exact ? "exact" : "inexact"; }

std::string to_string(Preconditioner p) {
  switch (p) {
    case Preconditioner::None:
      return "none";
    case Preconditioner::Jacobi:
      return "jacobi";
    case Preconditioner::SymmetricGaussSeidel:
      return "sgs";
  }
  return "?";
}

namespace {

class PreconditionerOp {
 public:
  PreconditionerOp(const CsrMatrix& A, Preconditioner kind) : A_(A), kind_(kind) {
    if (kind_ == Preconditioner::None) return;
    diag_ = A.diagonal();
    for (int i = 0; i < diag_.size(); ++i) {
      if (!(diag_[i] > 0.0)) throw NumericalFailure("non-positive diagonal entry; matrix is not SPD");
    }
  }

  void apply(const VectorXd& r, VectorXd& z) const {
    switch (kind_) {
      case Preconditioner::None:
        z = r;
        return;
      case Preconditioner::Jacobi:
        z = r.cwiseQuotient(diag_);
        return;
      case Preconditioner::SymmetricGaussSeidel:
        sgs(r, z);
        return;
    }
  }

 private:
  // z = (D + U)^{-1} D (D + L)^{-1} r
  void sgs(const VectorXd& r, VectorXd& z) const {
    const auto rp = A_.row_offsets();
    const auto cols = A_.columns();
    const auto vals = A_.values();
    const int n = A_.rows();
    z.resize(n);
    for (int i = 0; i < n; ++i) {
      double s = r[i];
      for (int k = rp[i]; k < rp[i + 1] && cols[k] < i; ++k) s -= vals[k] * z[cols[k]];
      z[i] = s / diag_[i];
    }
    for (int i = 0; i < n; ++i) z[i] *= diag_[i];
    for (int i = n - 1; i >= 0; --i) {
      double s = z[i];
      for (int k = rp[i + 1] - 1; k >= rp[i] && cols[k] > i; --k) s -= vals[k] * z[cols[k]];
      z[i] = s / diag_[i];
    }
  }

  const CsrMatrix& A_;
  Preconditioner kind_;
  VectorXd diag_;
};

}  // namespace

SolveResult pcg(const CsrMatrix& A, const VectorXd& b, const SolveConfig& config, const VectorXd& x0) {
  config.validate();
  const int n = A.rows();
  if (b.size() != n) throw InvalidInput("pcg: right-hand side size mismatch");
  SolveResult res;
  res.x = x0.size() == n ? x0 : VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (n == 0) return res;

  VectorXd r = b - A * res.x;
  if (bnorm == 0.0 && r.norm() == 0.0) return res;
  const double ref = bnorm > 0.0 ? bnorm : r.norm();

  const PreconditionerOp M(A, config.preconditioner);
  VectorXd z, Ap;
  M.apply(r, z);
  VectorXd p = z;
  double rz = r.dot(z);

  const bool exact = config.mode == SolveMode::Exact;
  const int cap = exact ? config.max_iterations : config.inexact_iterations;
  res.relative_residual = r.norm() / ref;
  for (int it = 0; it < cap; ++it) {
    if (exact && res.relative_residual <= config.tolerance) return res;
    if (res.relative_residual == 0.0) return res;
    A.multiply(p, Ap);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) throw NumericalFailure("pcg breakdown: non-positive curvature, matrix is not SPD");
    const double alpha = rz / pAp;
    res.x.noalias() += alpha * p;
    r.noalias() -= alpha * Ap;
    ++res.iterations;
    res.relative_residual = r.norm() / ref;
    M.apply(r, z);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  if (exact && res.relative_residual > config.tolerance) {
    throw NumericalFailure("pcg did not reach tolerance " + std::to_string(config.tolerance) + " within " +
                           std::to_string(config.max_iterations) + " iterations (residual " +
                           std::to_string(res.relative_residual) + ")");
  }
  return res;
}

SaddleSolution dense_saddle_solve(const MatrixXd& A, const MatrixXd& B, const VectorXd& f1, const VectorXd& f2) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.rows();
  if (A.cols() != n || B.cols() != n || f1.size() != n || f2.size() != m) {
    throw InvalidInput("dense_saddle_solve: block size mismatch");
  }
  MatrixXd K = MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = A;
  K.topRightCorner(n, m) = B.transpose();
  K.bottomLeftCorner(m, n) = B;
  VectorXd rhs(n + m);
  rhs << f1, f2;

  Eigen::FullPivLU<MatrixXd> lu(K);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw NumericalFailure("saddle-point system is singular");
  const VectorXd sol = lu.solve(rhs);
  const double resid = (K * sol - rhs).norm();
  const double scale = K.norm() * sol.norm() + rhs.norm();
  if (scale > 0 && resid > 1e-10 * scale) throw NumericalFailure("saddle-point solve lost accuracy");
  return {sol.head(n), sol.tail(m)};
}

SaddleSolution block_saddle_solve(std::span<const MatrixXd> blocks, const MatrixXd& B, const VectorXd& f1,
                                  const VectorXd& f2) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) {
    if (b.rows() != b.cols()) throw InvalidInput("block_saddle_solve: blocks must be square");
    n += b.rows();
  }
  const Eigen::Index m = B.rows();
  if (B.cols() != n || f1.size() != n || f2.size() != m) throw InvalidInput("block_saddle_solve: block size mismatch");

  std::vector<Eigen::LLT<MatrixXd>> factors;
  factors.reserve(blocks.size());
  double a_norm = 0.0;
  for (const auto& b : blocks) {
    factors.emplace_back(b);
    if (factors.back().info() != Eigen::Success) throw NumericalFailure("saddle-point system: diagonal block is not SPD");
    a_norm = std::max(a_norm, b.norm());
  }
  auto apply_inverse = [&](MatrixXd& X) {
    Eigen::Index off = 0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const Eigen::Index rows = blocks[k].rows();
      X.middleRows(off, rows) = factors[k].solve(X.middleRows(off, rows));
      off += rows;
    }
  };
  // B is typically very sparse (constraint rows); products are formed row by row
  auto times_b = [&](const MatrixXd& X) {
    MatrixXd out = MatrixXd::Zero(m, X.cols());
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) {
        if (B(i, j) != 0.0) out.row(i) += B(i, j) * X.row(j);
      }
    }
    return out;
  };

  // Schur complement B A^{-1} B^T
  MatrixXd AiBt = B.transpose();
  apply_inverse(AiBt);
  Eigen::LLT<MatrixXd> schur;
  if (m > 0) {
    schur.compute(times_b(AiBt));
    if (schur.info() != Eigen::Success) throw NumericalFailure("saddle-point system is singular (constraint rank deficit)");
  }
  auto solve_once = [&](const VectorXd& r1, const VectorXd& r2, VectorXd& x, VectorXd& y) {
    MatrixXd ar = r1;
    apply_inverse(ar);
    y = m > 0 ? VectorXd(schur.solve(times_b(ar).col(0) - r2)) : VectorXd::Zero(0);
    x = ar.col(0) - AiBt * y;
  };
  auto residual = [&](const VectorXd& x, const VectorXd& y, VectorXd& r1, VectorXd& r2) {
    r1 = f1 - B.transpose() * y;
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
      r1.segment(off, b.rows()) -= b * x.segment(off, b.rows());
      off += b.rows();
    }
    r2 = f2 - B * x;
  };

  VectorXd x, y, r1, r2, dx, dy;
  solve_once(f1, f2, x, y);
  // one step of iterative refinement tightens the constraint rows
  residual(x, y, r1, r2);
  solve_once(r1, r2, dx, dy);
  x += dx;
  y += dy;
  residual(x, y, r1, r2);

  const double resid = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
  const double scale = (a_norm + B.norm()) * std::sqrt(x.squaredNorm() + y.squaredNorm()) +
                       std::sqrt(f1.squaredNorm() + f2.squaredNorm());
  if (scale > 0 && resid > 1e-10 * scale) throw NumericalFailure("saddle-point solve lost accuracy");
  return {std::move(x), std::move(y)};
}

}  // namespace hcurlest
