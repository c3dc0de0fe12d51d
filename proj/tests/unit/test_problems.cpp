#include "hcurlest/problems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hcurlest;

namespace {

constexpr double kStep = 1e-4;

Vec3 fd_curl(const std::function<Vec3(const Vec3&)>& F, const Vec3& x) {
  Mat3 D;
  for (int d = 0; d < 3; ++d) {
    const Vec3 h = kStep * Vec3::Unit(d);
    D.col(d) = (F(x + h) - F(x - h)) / (2 * kStep);
  }
  return {D(2, 1) - D(1, 2), D(0, 2) - D(2, 0), D(1, 0) - D(0, 1)};
}

double fd_div(const std::function<Vec3(const Vec3&)>& F, const Vec3& x) {
  double s = 0.0;
  for (int d = 0; d < 3; ++d) {
    const Vec3 h = kStep * Vec3::Unit(d);
    s += (F(x + h)[d] - F(x - h)[d]) / (2 * kStep);
  }
  return s;
}

// 20 points per subdomain, kept `margin` away from the coordinate planes.
std::vector<std::pair<Vec3, int>> sample_points(const ProblemSpec& p, double margin, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<int, int> count;
  std::vector<std::pair<Vec3, int>> out;
  for (int draw = 0; draw < 2000; ++draw) {
    Vec3 x;
    for (int d = 0; d < 3; ++d) x[d] = p.domain.lo[d] + u(rng) * (p.domain.hi[d] - p.domain.lo[d]);
    if (x.head<2>().cwiseAbs().minCoeff() < margin || std::abs(x[2]) < margin) continue;
    const int l = p.classify(x);
    if (count[l]++ < 20) out.emplace_back(x, l);
  }
  return out;
}

void expect_self_consistent(const ProblemSpec& p) {
  for (const auto& [x, l] : sample_points(p, 0.01, 17)) {
    const int label = l;
    const auto sigma = [&](const Vec3& y) {
      return Vec3(fd_curl([&](const Vec3& z) { return p.exact_u(z, label); }, y) / p.mu(label));
    };
    const Vec3 lhs = fd_curl(sigma, x) + p.beta(label) * p.exact_u(x, label);
    const Vec3 f = p.f(x, label);
    EXPECT_LE((f - lhs).norm(), 1e-5 * f.norm()) << p.name << " at " << x.transpose();

    const Vec3 curl = fd_curl([&](const Vec3& z) { return p.exact_u(z, label); }, x);
    EXPECT_LE((curl - p.exact_curl_u(x, label)).norm(), 1e-6 * (1 + curl.norm()));
    EXPECT_LE((p.exact_sigma(x, label) - p.exact_curl_u(x, label) / p.mu(label)).norm(),
              1e-12 * (1 + p.exact_sigma(x, label).norm()));
    EXPECT_NEAR(fd_div([&](const Vec3& z) { return p.f(z, label); }, x), p.div_f(x, label), 1e-5 * (1 + f.norm()));
  }
}

// [[beta u . n]] across the plane x_axis = 0 at x.
double normal_flux_jump(const ProblemSpec& p, Vec3 x, int axis) {
  x[axis] = 0.0;
  const Vec3 n = Vec3::Unit(axis);
  const int l_plus = p.classify(x + 1e-9 * n);
  const int l_minus = p.classify(x - 1e-9 * n);
  EXPECT_NE(l_plus, l_minus);
  return p.beta(l_plus) * p.exact_u(x, l_plus).dot(n) - p.beta(l_minus) * p.exact_u(x, l_minus).dot(n);
}

}  // namespace

TEST(ExampleOne, PhiFirstBranchAtZero) {
  const Example1Params c;
  const IntersectingInterfacePotential pot(c);
  const double expected = std::cos((M_PI / 2 - c.sigma_angle) * c.gamma) * std::cos((-M_PI / 2 + c.rho) * c.gamma);
  EXPECT_NEAR(pot.phi(0.0), expected, 1e-15);
  EXPECT_EQ(c.sigma_angle, -2.3561944901923448);
  EXPECT_EQ(c.R, 5.8284271247461907);
}

TEST(ExampleOne, PhiIsContinuousAcrossSectors) {
  const IntersectingInterfacePotential pot{Example1Params{}};
  for (int b = 0; b < 3; ++b) {
    const double theta = (b + 1) * M_PI / 2;
    EXPECT_NEAR(pot.phi_branch(b, theta), pot.phi_branch(b + 1, theta), 1e-12) << b;
  }
  EXPECT_NEAR(pot.phi_branch(3, 2 * M_PI), pot.phi_branch(0, 0.0), 1e-12);
}

TEST(ExampleOne, PotentialIsHarmonicPerSector) {
  const IntersectingInterfacePotential pot{Example1Params{}};
  const double g = pot.params().gamma;
  for (double theta : {0.3, 1.9, 3.7, 5.5}) {
    const double h = 1e-4;
    const double second = (pot.phi(theta + h) - 2 * pot.phi(theta) + pot.phi(theta - h)) / (h * h);
    EXPECT_NEAR(second + g * g * pot.phi(theta), 0.0, 1e-6);
    EXPECT_NEAR((pot.phi(theta + h) - pot.phi(theta - h)) / (2 * h), pot.phi_prime(theta), 1e-8);
  }
}

TEST(ExampleOne, AxisIsFlaggedSingular) {
  const IntersectingInterfacePotential pot{Example1Params{}};
  const PotentialSample s = pot.eval(Vec3(0.0, 0.0, 0.1));
  EXPECT_TRUE(s.singular);
  EXPECT_EQ(s.gradient.norm(), 0.0);
  EXPECT_FALSE(pot.eval(Vec3(0.1, 0.0, 0.1)).singular);
}

TEST(ExampleOne, DataAndCoefficients) {
  const ProblemSpec p = example1(SourceVariant::DivergenceFree);
  EXPECT_EQ(p.domain.lo, Vec3(-1, -1, -0.25));
  EXPECT_EQ(p.domain.hi, Vec3(1, 1, 0.25));
  const int l1 = p.classify(Vec3(0.5, 0.5, 0.0));
  const int l3 = p.classify(Vec3(-0.5, -0.5, 0.0));
  const int l2 = p.classify(Vec3(-0.5, 0.5, 0.0));
  EXPECT_EQ(l1, l3);
  EXPECT_NE(l1, l2);
  EXPECT_NEAR(p.beta(l1), 5.8284271247461907, 1e-15);
  EXPECT_EQ(p.beta(l2), 1.0);
  EXPECT_EQ(p.mu(l1), 1.0);
  const ProblemSpec q = example1(SourceVariant::NotHDiv);
  EXPECT_EQ(q.beta(l1), 1.0);
  EXPECT_EQ(q.mu(l1), 1.0);
  EXPECT_FALSE(static_cast<bool>(q.neumann_field));
  EXPECT_EQ(p.exact_sigma(Vec3(0.3, 0.4, 0.1), l1).norm(), 0.0);
}

TEST(ExampleOne, DivergenceFreeVariantHasContinuousWeightedFlux) {
  const ProblemSpec p = example1(SourceVariant::DivergenceFree);
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(0.05, 0.95), z(-0.24, 0.24);
  for (int k = 0; k < 20; ++k) {
    const Vec3 x((k % 2 ? 1.0 : -1.0) * u(rng), (k % 3 ? 1.0 : -1.0) * u(rng), z(rng));
    for (int axis : {0, 1}) {
      const double scale = std::abs(p.beta(p.classify(x)) * p.exact_u(x, p.classify(x)).norm());
      EXPECT_LE(std::abs(normal_flux_jump(p, x, axis)), 1e-10 * (1 + scale));
    }
  }
}

TEST(ExampleOne, OtherVariantHasWeightedFluxJump) {
  const ProblemSpec p = example1(SourceVariant::NotHDiv);
  // u = grad psi is continuous in the (beta = R) normal flux, so with
  // beta = 1 the plain normal component jumps
  EXPECT_GT(std::abs(normal_flux_jump(p, Vec3(0.0, 0.4, 0.1), 0)), 1e-3);
}

TEST(ExampleOne, SelfConsistent) {
  expect_self_consistent(example1(SourceVariant::DivergenceFree));
  expect_self_consistent(example1(SourceVariant::NotHDiv));
}

TEST(ExampleTwo, SelfConsistent) {
  expect_self_consistent(example2(SourceVariant::DivergenceFree));
  expect_self_consistent(example2(SourceVariant::NotHDiv));
  expect_self_consistent(example2(SourceVariant::NotHDiv, 0.3));
}

TEST(ExampleTwo, Coefficients) {
  const double a = 1e-3;
  const ProblemSpec p = example2(SourceVariant::DivergenceFree, a);
  const int in = p.classify(Vec3(0.5, 0.5, 0.5));
  const int out = p.classify(Vec3(-0.5, 0.5, 0.5));
  EXPECT_EQ(p.mu(in), a);
  EXPECT_EQ(p.mu(out), 1.0);
  EXPECT_EQ(p.beta(in), 1.0 / a);
  EXPECT_EQ(p.beta(out), 1.0);
  const ProblemSpec q = example2(SourceVariant::NotHDiv, a);
  EXPECT_EQ(q.beta(in), 1.0);
  EXPECT_EQ(q.beta(out), 1.0 / a);
  EXPECT_THROW(example2(SourceVariant::NotHDiv, 0.0), InvalidInput);
}

TEST(ExampleTwo, TangentialTraceVanishesOnMidplane) {
  const ProblemSpec p = example2(SourceVariant::NotHDiv);
  for (const Vec3 x : {Vec3(0.3, 0.4, 0.0), Vec3(-0.7, 0.2, 0.0)}) {
    for (int l : {0, 1}) {
      EXPECT_EQ(p.exact_u(x, l)[0], 0.0);
      EXPECT_EQ(p.exact_u(x, l)[1], 0.0);
    }
  }
}

TEST(ExampleTwo, WeightedFluxJumpDependsOnVariant) {
  const Vec3 x(0.3, 0.4, 0.2);
  EXPECT_LT(std::abs(normal_flux_jump(example2(SourceVariant::DivergenceFree), x, 2)), 1e-12);
  EXPECT_GT(std::abs(normal_flux_jump(example2(SourceVariant::NotHDiv), x, 2)), 1.0);
}

TEST(ExampleTwo, PotentialFieldIsSolenoidal) {
  const ProblemSpec p = example2(SourceVariant::DivergenceFree, 1.0);
  for (const Vec3 x : {Vec3(0.3, 0.4, 0.2), Vec3(-0.6, 0.1, -0.8)}) {
    EXPECT_NEAR(fd_div([&](const Vec3& y) { return p.exact_u(y, 0); }, x), 0.0, 1e-8);
  }
}

TEST(Problems, LookupByName) {
  for (const char* n : {"example1/fdiv0", "example1/fnothdiv", "example2/fdiv0", "example2/fnothdiv"}) {
    EXPECT_EQ(problem_by_name(n).name, n);
  }
  EXPECT_THROW(problem_by_name("example3/fdiv0"), InvalidInput);
}

TEST(Problems, SmoothCubeIsSingleSubdomain) {
  const ProblemSpec p = smooth_cube_problem();
  EXPECT_EQ(p.classify(Vec3(0.5, 0.5, 0.5)), p.classify(Vec3(-0.5, 0.5, 0.5)));
  expect_self_consistent(p);
}
