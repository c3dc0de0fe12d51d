#include "hcurlest/problems.hpp"

#include <cmath>

namespace hcurlest {

TetMesh ProblemSpec::initial_mesh(std::array<int, 3> n) const {
  return build_box_mesh(domain, n, classify, boundary_part);
}

namespace {

constexpr double kPi = M_PI;

BoundaryClassifier all_dirichlet() {
  return [](const Vec3&) { return BoundaryTag::Dirichlet; };
}

// v(x) = (sin pi yz, sin pi xz, sin pi xy) and derived quantities.
Vec3 field_v(const Vec3& x) {
  return {std::sin(kPi * x[1] * x[2]), std::sin(kPi * x[0] * x[2]), std::sin(kPi * x[0] * x[1])};
}

Vec3 curl_v(const Vec3& x) {
  const double cxy = std::cos(kPi * x[0] * x[1]);
  const double cxz = std::cos(kPi * x[0] * x[2]);
  const double cyz = std::cos(kPi * x[1] * x[2]);
  return {kPi * x[0] * (cxy - cxz), kPi * x[1] * (cyz - cxy), kPi * x[2] * (cxz - cyz)};
}

// curl curl v = -laplace v since div v = 0.
Vec3 curl_curl_v(const Vec3& x) {
  const double k2 = kPi * kPi;
  return {k2 * (x[1] * x[1] + x[2] * x[2]) * std::sin(kPi * x[1] * x[2]),
          k2 * (x[0] * x[0] + x[2] * x[2]) * std::sin(kPi * x[0] * x[2]),
          k2 * (x[0] * x[0] + x[1] * x[1]) * std::sin(kPi * x[0] * x[1])};
}

}  // namespace

double IntersectingInterfacePotential::phi_branch(int branch, double theta) const {
  const double g = p_.gamma;
  const double rho = p_.rho;
  const double s = p_.sigma_angle;
  switch (branch) {
    case 0:
      return std::cos((kPi / 2 - s) * g) * std::cos((theta - kPi / 2 + rho) * g);
    case 1:
      return std::cos(rho * g) * std::cos((theta - kPi + s) * g);
    case 2:
      return std::cos(s * g) * std::cos((theta - kPi - rho) * g);
    default:
      return std::cos((kPi / 2 - rho) * g) * std::cos((theta - 3 * kPi / 2 - s) * g);
  }
}

namespace {

int branch_of(double theta) {
  if (theta <= kPi / 2) return 0;
  if (theta <= kPi) return 1;
  if (theta <= 3 * kPi / 2) return 2;
  return 3;
}

}  // namespace

double IntersectingInterfacePotential::phi(double theta) const { return phi_branch(branch_of(theta), theta); }

double IntersectingInterfacePotential::phi_prime_branch(int branch, double theta) const {
  const double g = p_.gamma;
  const double rho = p_.rho;
  const double s = p_.sigma_angle;
  switch (branch) {
    case 0:
      return -g * std::cos((kPi / 2 - s) * g) * std::sin((theta - kPi / 2 + rho) * g);
    case 1:
      return -g * std::cos(rho * g) * std::sin((theta - kPi + s) * g);
    case 2:
      return -g * std::cos(s * g) * std::sin((theta - kPi - rho) * g);
    default:
      return -g * std::cos((kPi / 2 - rho) * g) * std::sin((theta - 3 * kPi / 2 - s) * g);
  }
}

double IntersectingInterfacePotential::phi_prime(double theta) const {
  return phi_prime_branch(branch_of(theta), theta);
}

PotentialSample IntersectingInterfacePotential::eval(const Vec3& x, int label) const {
  PotentialSample out;
  const double r = std::hypot(x[0], x[1]);
  if (r == 0.0) {
    out.singular = true;
    return out;
  }
  double theta = std::atan2(x[1], x[0]);
  if (theta < 0) theta += 2 * kPi;
  int branch = branch_of(theta);
  if (label >= 0 && (x[0] == 0.0 || x[1] == 0.0)) {
    // on a sector boundary: of the two adjacent sectors take the one in
    // subdomain `label` (even branches are the x y > 0 quadrants, label 1)
    const int k = static_cast<int>(std::lround(theta / (kPi / 2))) % 4;
    branch = ((k + 3) % 4 % 2 == 0) == (label == 1) ? (k + 3) % 4 : k;
    if (branch == 3 && k == 0) theta = 2 * kPi;
  }
  const double g = p_.gamma;
  const double ph = phi_branch(branch, theta);
  const double dph = phi_prime_branch(branch, theta);
  const double rg = std::pow(r, g);
  out.value = rg * ph;
  const double c = x[0] / r;
  const double s = x[1] / r;
  const double radial = g * rg / r * ph;
  const double angular = rg / r * dph;
  out.gradient = Vec3(radial * c - angular * s, radial * s + angular * c, 0.0);
  return out;
}

ProblemSpec example1(SourceVariant variant, const Example1Params& params) {
  if (!(params.delta > 0) || !(params.R > 0) || !(params.gamma > 0)) {
    throw InvalidInput("example1: delta, R and gamma must be positive");
  }
  ProblemSpec p;
  const bool div0 = variant == SourceVariant::DivergenceFree;
  p.name = div0 ? "example1/fdiv0" : "example1/fnothdiv";
  p.domain = {Vec3(-1, -1, -params.delta), Vec3(1, 1, params.delta)};
  // cells of size 0.5 align with the interfaces x = 0 and y = 0
  p.default_subdivisions = {4, 4, std::max(1, static_cast<int>(std::lround(4 * params.delta)))};
  p.classify = [](const Vec3& x) { return x[0] * x[1] > 0 ? 1 : 0; };
  p.boundary_part = all_dirichlet();

  const double R = params.R;
  auto alpha = [R](int label) { return label == 1 ? R : 1.0; };
  p.mu = [](int) { return 1.0; };
  if (div0) {
    p.beta = alpha;
  } else {
    p.beta = [](int) { return 1.0; };
  }

  const IntersectingInterfacePotential pot(params);
  p.exact_u = [pot](const Vec3& x, int label) { return pot.eval(x, label).gradient; };
  p.exact_curl_u = [](const Vec3&, int) { return Vec3::Zero().eval(); };
  p.exact_sigma = [](const Vec3&, int) { return Vec3::Zero().eval(); };
  auto beta = p.beta;
  p.f = [pot, beta](const Vec3& x, int label) { return (beta(label) * pot.eval(x, label).gradient).eval(); };
  p.div_f = [](const Vec3&, int) { return 0.0; };
  p.dirichlet_field = p.exact_u;
  return p;
}

ProblemSpec example2(SourceVariant variant, double a) {
  if (!(a > 0)) throw InvalidInput("example2: coefficient contrast a must be positive");
  ProblemSpec p;
  const bool div0 = variant == SourceVariant::DivergenceFree;
  p.name = div0 ? "example2/fdiv0" : "example2/fnothdiv";
  p.domain = {Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  p.default_subdivisions = {2, 2, 2};
  p.classify = [](const Vec3& x) { return x[0] * x[1] * x[2] > 0 ? 1 : 0; };
  p.boundary_part = all_dirichlet();
  p.mu = [a](int label) { return label == 1 ? a : 1.0; };
  if (div0) {
    p.beta = [a](int label) { return label == 1 ? 1.0 / a : 1.0; };
  } else {
    p.beta = [a](int label) { return label == 1 ? 1.0 : 1.0 / a; };
  }
  auto mu = p.mu;
  auto beta = p.beta;
  p.exact_u = [mu](const Vec3& x, int label) { return (mu(label) * field_v(x)).eval(); };
  p.exact_curl_u = [mu](const Vec3& x, int label) { return (mu(label) * curl_v(x)).eval(); };
  p.exact_sigma = [](const Vec3& x, int) { return curl_v(x); };
  p.f = [mu, beta](const Vec3& x, int label) {
    return (curl_curl_v(x) + beta(label) * mu(label) * field_v(x)).eval();
  };
  p.div_f = [](const Vec3&, int) { return 0.0; };
  p.dirichlet_field = p.exact_u;
  return p;
}

ProblemSpec problem_by_name(const std::string& name, double example2_a) {
  if (name == "example1/fdiv0") return example1(SourceVariant::DivergenceFree);
  if (name == "example1/fnothdiv") return example1(SourceVariant::NotHDiv);
  if (name == "example2/fdiv0") return example2(SourceVariant::DivergenceFree, example2_a);
  if (name == "example2/fnothdiv") return example2(SourceVariant::NotHDiv, example2_a);
  throw InvalidInput("unknown problem '" + name + "'");
}

ProblemSpec smooth_cube_problem() {
  ProblemSpec p = example2(SourceVariant::DivergenceFree, 1.0);
  p.name = "smooth-cube";
  p.classify = [](const Vec3&) { return 0; };
  p.default_subdivisions = {1, 1, 1};
  return p;
}

ProblemSpec constant_field_problem(const Vec3& c, double mu, double beta) {
  if (!(mu > 0) || !(beta > 0)) throw InvalidInput("coefficients must be positive");
  ProblemSpec p;
  p.name = "constant-field";
  p.domain = {Vec3(0, 0, 0), Vec3(1, 1, 1)};
  p.default_subdivisions = {2, 2, 2};
  p.classify = [](const Vec3&) { return 0; };
  p.boundary_part = all_dirichlet();
  p.mu = [mu](int) { return mu; };
  p.beta = [beta](int) { return beta; };
  p.exact_u = [c](const Vec3&, int) { return c; };
  p.exact_curl_u = [](const Vec3&, int) { return Vec3::Zero().eval(); };
  p.exact_sigma = [](const Vec3&, int) { return Vec3::Zero().eval(); };
  p.f = [c, beta](const Vec3&, int) { return (beta * c).eval(); };
  p.div_f = [](const Vec3&, int) { return 0.0; };
  p.dirichlet_field = p.exact_u;
  return p;
}

}  // namespace hcurlest
