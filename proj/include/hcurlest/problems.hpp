#pragma once

#include "hcurlest/core.hpp"
#include "hcurlest/mesh.hpp"

#include <string>

namespace hcurlest {

/// Coefficients, exact fields and data of an H(curl) interface benchmark
///
///   curl(mu^{-1} curl u) + beta u = f   in the domain,
///   u x n = g_D on the Dirichlet part,  (mu^{-1} curl u) x n = g_N on the Neumann part.
///
/// mu and beta are constant per subdomain label. Boundary data are given as
/// vector fields whose tangential traces are the data: g_D = dirichlet_field x n
/// and g_N = neumann_field x n.
struct ProblemSpec {
  std::string name;
  Box domain;
  std::array<int, 3> default_subdivisions{1, 1, 1};
  SubdomainClassifier classify;
  BoundaryClassifier boundary_part;

  std::function<double(int)> mu;
  std::function<double(int)> beta;

  VectorField exact_u;
  VectorField exact_curl_u;
  /// mu^{-1} curl u.
  VectorField exact_sigma;
  VectorField f;
  /// Elementwise divergence of f.
  ScalarField div_f;

  VectorField dirichlet_field;
  /// Empty when the problem has no Neumann part.
  VectorField neumann_field;

  /// curl sigma = f - beta u holds elementwise by construction.
  Vec3 exact_curl_sigma(const Vec3& x, int label) const { return f(x, label) - beta(label) * exact_u(x, label); }

  /// Interface-aligned Kuhn mesh of the domain.
  TetMesh initial_mesh(std::array<int, 3> n) const;
  TetMesh initial_mesh() const { return initial_mesh(default_subdivisions); }
};

enum class SourceVariant {
  DivergenceFree,  // div f = 0 (f in H(div))
  NotHDiv,         // f has normal jumps across interfaces
};

/// Parameters of the intersecting-interface potential r^gamma phi(theta).
struct Example1Params {
  double gamma = 0.5;
  double R = 5.8284271247461907;
  double rho = M_PI / 4.0;
  double sigma_angle = -2.3561944901923448;
  double delta = 0.25;
};

struct PotentialSample {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  /// Set on the axis r = 0, where the gradient is undefined and reported as zero.
  bool singular = false;
};

class IntersectingInterfacePotential {
 public:
  explicit IntersectingInterfacePotential(Example1Params p) : p_(p) {}

  /// phi on [0, 2 pi].
  double phi(double theta) const;
  double phi_prime(double theta) const;
  /// Value of phi on `branch` (0..3) evaluated at theta, used to check continuity.
  double phi_branch(int branch, double theta) const;
  double phi_prime_branch(int branch, double theta) const;

  /// With label >= 0, points on a sector boundary are evaluated from the
  /// side of subdomain `label`.
  PotentialSample eval(const Vec3& x, int label = -1) const;

  const Example1Params& params() const { return p_; }

 private:
  Example1Params p_;
};

ProblemSpec example1(SourceVariant variant, const Example1Params& params = {});
ProblemSpec example2(SourceVariant variant, double a = 1e-3);

/// "example1/fdiv0", "example1/fnothdiv", "example2/fdiv0", "example2/fnothdiv".
ProblemSpec problem_by_name(const std::string& name, double example2_a = 1e-3);

/// Example-2 fields with a = 1 on (-1, 1)^3 as a single subdomain
/// (mu = beta = 1, globally smooth solution). Used for a priori rate checks.
ProblemSpec smooth_cube_problem();

/// Constant exact field c with f = beta c and Dirichlet data from c on the
/// whole boundary.
ProblemSpec constant_field_problem(const Vec3& c, double mu = 1.0, double beta = 1.0);

}  // namespace hcurlest
