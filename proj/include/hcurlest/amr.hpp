#pragma once

#include "hcurlest/estimators.hpp"
#include "hcurlest/recovery.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hcurlest {

enum class EstimatorKind { New, NewLocal, Res };

std::string to_string(EstimatorKind k);
/// "NEW", "NEW_LOCAL", "RES".
EstimatorKind estimator_from_string(const std::string& s);

struct ConvergenceRecord {
  int iter = 0;
  std::size_t dof = 0;
  /// Joint error xi for NEW/NEW_LOCAL, |||u - u_T||| for RES.
  double error = 0.0;
  double rel_error = 0.0;
  /// Value of the estimator driving the loop.
  double eta = 0.0;
  double eff_index = 0.0;
  double seconds = 0.0;

  double primal_error = 0.0;
  /// NaN when the auxiliary problem was not solved.
  double auxiliary_error = std::numeric_limits<double>::quiet_NaN();
  double eta_new = std::numeric_limits<double>::quiet_NaN();
  double eta_tilde = std::numeric_limits<double>::quiet_NaN();
  std::size_t marked = 0;
};

struct IterationState {
  const TetMesh& mesh;
  const SolutionField& u;
  const EstimateReport& estimate;
  const ConvergenceRecord& record;
};

struct AmrConfig {
  EstimatorKind estimator = EstimatorKind::New;
  double theta = 0.5;
  /// Stop once the DoF count reaches this value (0 disables).
  std::size_t max_dofs = 150000;
  /// Number of solve-estimate passes, 0 disables.
  int max_iterations = 0;
  /// Stop once rel_error <= target (0 disables).
  double target_rel_error = 0.07;
  SolveConfig primal_solver;
  SolveConfig auxiliary_solver;
  QuadratureDegrees quadrature;
  /// Quadrature degree of the true-error integrals.
  int error_degree = 4;
  /// With NEW, additionally recover sigma~ and record eta~ each iteration;
  /// with NEW_LOCAL, eta is recorded anyway.
  bool track_both_new_estimators = false;

  std::function<void(const IterationState&)> on_iteration;

  void validate() const;
};

/// Greedy bulk marking: elements sorted by descending indicator (ties by id)
/// are taken until their squared sum reaches theta times the total.
std::vector<int> dorfler_mark(std::span<const double> indicators, double theta);

struct AmrResult {
  std::vector<ConvergenceRecord> records;
  std::unique_ptr<TetMesh> mesh;
  VectorXd u;
  std::optional<EstimateReport> estimate;
  /// Set when a numerical failure aborted the loop; records hold the
  /// iterations completed before it.
  std::string failure;
};

AmrResult run_amr(const ProblemSpec& problem, const TetMesh& initial, const AmrConfig& config);

/// Exact-field energy norms on a mesh (quadrature of the exact fields).
double exact_primal_norm(const TetMesh& mesh, const ProblemSpec& problem, int degree);
double exact_auxiliary_norm(const TetMesh& mesh, const ProblemSpec& problem, int degree);

}  // namespace hcurlest
