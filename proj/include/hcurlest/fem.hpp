#pragma once

#include "hcurlest/core.hpp"
#include "hcurlest/linalg.hpp"
#include "hcurlest/mesh.hpp"
#include "hcurlest/problems.hpp"
#include "hcurlest/quadrature.hpp"

#include <array>
#include <vector>

namespace hcurlest {

using Bary = std::array<double, 4>;

/// Vertex coordinates, barycentric gradients and volume of one tet.
struct TetGeometry {
  std::array<Vec3, 4> x;
  std::array<Vec3, 4> grad;
  double volume = 0.0;

  static TetGeometry of(const TetMesh& mesh, int t);
  static TetGeometry of(const std::array<Vec3, 4>& x);

  Vec3 point(const Bary& b) const { return b[0] * x[0] + b[1] * x[1] + b[2] * x[2] + b[3] * x[3]; }
};

/// Whitney edge functions W_ij = l_i grad l_j - l_j grad l_i of one tet with
/// the global edge sign folded in, so coefficient e means the circulation
/// along the globally oriented edge.
class WhitneyElement {
 public:
  WhitneyElement(const TetGeometry& g, const std::array<std::int8_t, 6>& signs);
  /// Unsigned (local orientation) element.
  explicit WhitneyElement(const TetGeometry& g);

  Vec3 value(int e, const Bary& b) const;
  std::array<Vec3, 6> values(const Bary& b) const;
  /// 2 grad l_i x grad l_j, constant on the tet.
  const Vec3& curl(int e) const { return curls_[e]; }
  const std::array<Vec3, 6>& curls() const { return curls_; }

  Vec3 expand(const std::array<double, 6>& c, const Bary& b) const;
  Vec3 expand_curl(const std::array<double, 6>& c) const;

  const TetGeometry& geometry() const { return g_; }

 private:
  TetGeometry g_;
  std::array<double, 6> sign_;
  std::array<Vec3, 6> curls_;
};

/// Elementwise matrices integrated exactly: curl-curl (constant curls) and
/// mass (quadratic integrand integrated with a degree-2 rule).
struct LocalMatrices {
  Eigen::Matrix<double, 6, 6> curlcurl;
  Eigen::Matrix<double, 6, 6> mass;
};
LocalMatrices local_matrices(const WhitneyElement& w);

enum class FieldKind {
  Primal,     // u: essential on the Dirichlet part
  Auxiliary,  // sigma: essential on the Neumann part
};

/// Lowest-order edge DOF map with the essential/free split of one problem.
class EdgeSpace {
 public:
  EdgeSpace(const TetMesh& mesh, FieldKind kind);

  const TetMesh& mesh() const { return *mesh_; }
  FieldKind kind() const { return kind_; }
  int num_dofs() const { return static_cast<int>(essential_.size()); }
  bool is_essential(int e) const { return essential_[e] != 0; }
  const std::vector<int>& free_dofs() const { return free_; }
  const std::vector<int>& essential_dofs() const { return fixed_; }

 private:
  const TetMesh* mesh_;
  FieldKind kind_;
  std::vector<std::uint8_t> essential_;
  std::vector<int> free_;
  std::vector<int> fixed_;
};

/// Per-tet evaluation interface shared by conforming and broken fields.
class DiscreteField {
 public:
  virtual ~DiscreteField() = default;
  virtual const TetMesh& mesh() const = 0;
  virtual std::array<double, 6> local_coefficients(int t) const = 0;

  Vec3 value(int t, const Bary& b) const;
  Vec3 curl(int t) const;
};

/// Conforming Whitney expansion: one coefficient per global edge.
class SolutionField : public DiscreteField {
 public:
  SolutionField(const TetMesh& mesh, VectorXd coefficients);

  const TetMesh& mesh() const override { return *mesh_; }
  std::array<double, 6> local_coefficients(int t) const override;
  const VectorXd& coefficients() const { return c_; }

 private:
  const TetMesh* mesh_;
  VectorXd c_;
};

/// Sizes of the quadrature rules used throughout.
struct QuadratureDegrees {
  int volume = 4;
  int face = 4;
  int edge = 5;

  void validate() const;
};

/// Full system over all edge DOFs plus the essential data. Rows of essential
/// DOFs are assembled like any other row; solve() eliminates them.
struct LinearSystem {
  CsrMatrix matrix;
  VectorXd rhs;
  VectorXd essential_values;  // zero on free DOFs
  std::vector<int> free_dofs;
  std::vector<int> essential_dofs;
};

LinearSystem assemble_primal(const TetMesh& mesh, const ProblemSpec& problem, const QuadratureDegrees& quad = {});
LinearSystem assemble_auxiliary(const TetMesh& mesh, const ProblemSpec& problem, const QuadratureDegrees& quad = {});

/// Matrix sum_K a_K (curl Wi, curl Wj) + b_K (Wi, Wj) with per-label weights.
CsrMatrix assemble_curlcurl_mass(const TetMesh& mesh, const std::function<double(int)>& curl_weight,
                                 const std::function<double(int)>& mass_weight);

struct FieldSolve {
  VectorXd coefficients;
  SolveResult stats;
};

/// Solves the free block A_ff x_f = b_f - A_fe x_e with essential data x_e.
FieldSolve solve(const LinearSystem& system, const SolveConfig& config);

/// Edge circulations int_e field . t ds (t = unnormalized global edge vector
/// over its length, i.e. ds along the edge) with a composite Gauss rule of
/// degree `degree`, bisected adaptively so that integrable endpoint
/// singularities are resolved. edge_label() picks the evaluation subdomain.
VectorXd interpolate_edge(const TetMesh& mesh, const VectorField& field, std::span<const int> edges, int degree = 5);

/// Interpolant of a field on all edges.
VectorXd interpolate_edge(const TetMesh& mesh, const VectorField& field, int degree = 5);

/// Label used to evaluate one-sided fields on edge e: the smallest label of
/// the tets touching it.
int edge_label(const TetMesh& mesh, int e);

struct ErrorReport {
  std::vector<double> element_sq;
  double total = 0.0;  // sqrt of the sum
};

/// int_K a |curl v - curl v_h|^2 + b |v - v_h|^2 per element. Pass field ==
/// nullptr to get the norm of the exact field itself.
ErrorReport energy_error(const DiscreteField* field, const TetMesh& mesh, const VectorField& exact,
                         const VectorField& exact_curl, const std::function<double(int)>& curl_weight,
                         const std::function<double(int)>& mass_weight, int degree);

/// |||u - u_T|||_{mu,beta}.
ErrorReport primal_energy_error(const DiscreteField& u, const ProblemSpec& problem, int degree);
/// |||sigma - sigma_T|||_{beta,mu}.
ErrorReport auxiliary_energy_error(const DiscreteField& sigma, const ProblemSpec& problem, int degree);

/// Tangential jump norms ||[[v x n]]||_F over interior faces (index by face
/// id, 0 on boundary faces).
std::vector<double> tangential_jumps(const DiscreteField& v, int face_degree = 4);

}  // namespace hcurlest
