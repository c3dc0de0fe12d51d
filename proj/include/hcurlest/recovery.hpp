#pragma once

#include "hcurlest/fem.hpp"

#include <vector>

namespace hcurlest {

/// Six Whitney coefficients per tet (local orientation), no continuity.
class BrokenField : public DiscreteField {
 public:
  BrokenField(const TetMesh& mesh, std::vector<std::array<double, 6>> coefficients);

  const TetMesh& mesh() const override { return *mesh_; }
  std::array<double, 6> local_coefficients(int t) const override { return c_[t]; }
  const std::vector<std::array<double, 6>>& coefficients() const { return c_; }

 private:
  const TetMesh* mesh_;
  std::vector<std::array<double, 6>> c_;
};

/// One linear condition on the broken patch coefficients:
/// c[first] - c[second] = value (second < 0 for a prescribed value).
struct PatchConstraint {
  enum class Kind { Prescribed, Jump };
  Kind kind;
  int first;
  int second;
  double value;
  /// False when implied by the rows kept before it (closed rings around
  /// interior edges, chains between prescribed values).
  bool kept;
};

/// Hybrid system of one vertex patch. Unknown 6 i + e is the circulation of
/// the correction along local edge e of tets[i], measured in the global edge
/// orientation so that neighbouring tets share the meaning of a coefficient.
struct PatchSystem {
  int center = -1;
  std::vector<int> tets;
  /// (1/|K|) int_K l_z (f - beta u_T) per member tet.
  std::vector<Vec3> rbar;
  /// beta^{-1} curl-curl + mu mass per member tet, 6x6.
  std::vector<MatrixXd> blocks;
  VectorXd rhs;
  std::vector<PatchConstraint> constraints;

  int num_unknowns() const { return static_cast<int>(6 * tets.size()); }
  /// Rows of the kept constraints.
  MatrixXd constraint_matrix(bool kept_only = true) const;
  VectorXd constraint_values(bool kept_only = true) const;
  /// Block-diagonal A assembled densely.
  MatrixXd dense_matrix() const;
};

/// Edge circulations (global orientation) of w_K = mu_K^{-1} curl u_T, per tet.
std::vector<std::array<double, 6>> constitutive_circulations(const SolutionField& u, const ProblemSpec& problem);

PatchSystem build_patch_system(const SolutionField& u, const ProblemSpec& problem, int z, int volume_degree = 4);

struct PatchSolution {
  VectorXd coefficients;
  VectorXd multipliers;
  /// max |row residual| over all constraints, kept or not.
  double max_constraint_residual = 0.0;
};

/// Throws NumericalFailure naming the vertex when the system is singular.
PatchSolution solve_patch_system(const PatchSystem& system);

struct LocalRecovery {
  BrokenField sigma_tilde;
  /// sum_z sigma^Delta_z.
  BrokenField correction;
  /// Worst constraint residual over all patches, relative to the data scale.
  double max_constraint_residual = 0.0;
};

LocalRecovery recover_local(const SolutionField& u, const ProblemSpec& problem, int volume_degree = 4);

}  // namespace hcurlest
