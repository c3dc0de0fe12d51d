#include "fixtures.hpp"

#include "hcurlest/estimators.hpp"
#include "hcurlest/recovery.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hcurlest;

namespace {

SolutionField solve_primal(const TetMesh& m, const ProblemSpec& p) {
  return SolutionField(m, solve(assemble_primal(m, p), SolveConfig{}).coefficients);
}

SolutionField solve_auxiliary(const TetMesh& m, const ProblemSpec& p) {
  return SolutionField(m, solve(assemble_auxiliary(m, p), SolveConfig{}).coefficients);
}

// Rigid rotation u = w x x / 2 with curl u = w, reproduced exactly by ND0.
ProblemSpec rotation_problem(const Vec3& w, double beta) {
  ProblemSpec p = constant_field_problem(Vec3::Zero(), 1.0, beta);
  p.exact_u = [w](const Vec3& x, int) { return Vec3(0.5 * w.cross(x)); };
  p.exact_curl_u = [w](const Vec3&, int) { return w; };
  p.exact_sigma = p.exact_curl_u;
  p.f = [w, beta](const Vec3& x, int) { return Vec3(0.5 * beta * w.cross(x)); };
  p.dirichlet_field = p.exact_u;
  return p;
}

// Integrals of both functionals by degree-8 quadrature, for data with
// vanishing Dirichlet trace and no Neumann part.
std::pair<double, double> functionals_oracle(const SolutionField& u, const SolutionField& tau, const ProblemSpec& p) {
  const TetMesh& m = u.mesh();
  const TetRule rule = tet_rule(8);
  double J = 0.0, Js = 0.0;
  for (int t = 0; t < static_cast<int>(m.num_tets()); ++t) {
    const TetGeometry g = TetGeometry::of(m, t);
    const int l = m.label(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bary& b = rule.points[q];
      const Vec3 x = g.point(b);
      const double w = rule.weights[q] * g.volume / kRefTetVolume;
      const Vec3 uv = u.value(t, b), tv = tau.value(t, b);
      J += w * (0.5 * (u.curl(t).squaredNorm() / p.mu(l) + p.beta(l) * uv.squaredNorm()) - p.f(x, l).dot(uv));
      Js -= w * 0.5 * (p.mu(l) * tv.squaredNorm() + (p.f(x, l) - tau.curl(t)).squaredNorm() / p.beta(l));
    }
  }
  return {J, Js};
}

// u = (sin(pi y) sin(pi z), 0, 0) has zero tangential trace on the unit cube.
ProblemSpec bubble_problem(double beta) {
  ProblemSpec p = constant_field_problem(Vec3::Zero(), 1.0, beta);
  p.exact_u = [](const Vec3& x, int) { return Vec3(std::sin(M_PI * x[1]) * std::sin(M_PI * x[2]), 0, 0); };
  p.exact_curl_u = [](const Vec3& x, int) {
    return Vec3(0, M_PI * std::sin(M_PI * x[1]) * std::cos(M_PI * x[2]), -M_PI * std::cos(M_PI * x[1]) * std::sin(M_PI * x[2]));
  };
  p.exact_sigma = p.exact_curl_u;
  p.f = [beta, u = p.exact_u](const Vec3& x, int l) { return Vec3((2 * M_PI * M_PI + beta) * u(x, l)); };
  p.dirichlet_field = p.exact_u;
  return p;
}

}  // namespace

TEST(EtaNew, VanishesForConsistentPair) {
  const Vec3 w(0.3, -0.2, 0.5);
  const ProblemSpec p = rotation_problem(w, 2.0);
  const TetMesh m = bisect_all(p.initial_mesh({2, 2, 2}));
  const SolutionField u(m, interpolate_edge(m, p.exact_u));
  const SolutionField sigma(m, interpolate_edge(m, p.exact_sigma));
  const EstimateReport r = eta_new(u, sigma, p, 4);
  const SolutionField zero(m, VectorXd::Zero(static_cast<Eigen::Index>(m.num_edges())));
  const double scale = eta_new(zero, zero, p, 4).global;
  EXPECT_LT(r.global, 1e-12 * scale);
  ASSERT_EQ(r.indicators.size(), m.num_tets());
}

TEST(EtaNew, ComponentsSumToIndicators) {
  const ProblemSpec p = example2(SourceVariant::NotHDiv);
  const TetMesh m = p.initial_mesh();
  const EstimateReport r = eta_new(solve_primal(m, p), solve_auxiliary(m, p), p, 4);
  double total = 0.0;
  for (std::size_t t = 0; t < r.indicators.size(); ++t) {
    double s = 0.0;
    for (const auto& c : r.components) s += c[t];
    EXPECT_NEAR(s, sqr(r.indicators[t]), 1e-14 * (1 + s));
    total += s;
  }
  EXPECT_NEAR(r.global_sq(), total, 1e-12 * total);
}

TEST(EtaNew, MatchesDegreeEightOracle) {
  const ProblemSpec p = example2(SourceVariant::DivergenceFree, 0.1);
  const TetMesh m = p.initial_mesh();
  const SolutionField u = solve_primal(m, p);
  const SolutionField s = solve_auxiliary(m, p);
  const TetRule rule = tet_rule(8);
  double oracle = 0.0;
  for (int t = 0; t < static_cast<int>(m.num_tets()); ++t) {
    const TetGeometry g = TetGeometry::of(m, t);
    const int l = m.label(t);
    const double mu = p.mu(l), beta = p.beta(l);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bary& b = rule.points[q];
      const double w = rule.weights[q] * g.volume / kRefTetVolume;
      oracle += w * ((mu * s.value(t, b) - u.curl(t)).squaredNorm() / mu +
                     (s.curl(t) + beta * u.value(t, b) - p.f(g.point(b), l)).squaredNorm() / beta);
    }
  }
  EXPECT_NEAR(eta_new(u, s, p, 8).global_sq(), oracle, 1e-8 * oracle);
}

TEST(EtaNew, EqualsJointErrorForHomogeneousTrace) {
  const ProblemSpec p = bubble_problem(3.0);
  const TetMesh m = p.initial_mesh({5, 5, 5});
  const SolutionField u = solve_primal(m, p);
  const SolutionField s = solve_auxiliary(m, p);
  const double xi2 = sqr(primal_energy_error(u, p, 8).total) + sqr(auxiliary_energy_error(s, p, 8).total);
  EXPECT_NEAR(eta_new(u, s, p, 8).global_sq(), xi2, 1e-4 * xi2);
}

TEST(EtaTilde, BoundsEtaFromAbove) {
  for (const char* name : {"example1/fnothdiv", "example2/fnothdiv", "example2/fdiv0"}) {
    const ProblemSpec p = problem_by_name(name);
    const TetMesh m = bisect_all(p.initial_mesh());
    const SolutionField u = solve_primal(m, p);
    const double eta = eta_new(u, solve_auxiliary(m, p), p).global;
    const LocalRecovery rec = recover_local(u, p);
    const double tilde = eta_tilde(u, rec.sigma_tilde, p).global;
    EXPECT_GE(tilde - eta, -1e-12 * tilde) << name;
  }
}

TEST(EtaRes, VanishesForReproducedConstant) {
  const ProblemSpec p = constant_field_problem(Vec3(1.0, -2.0, 0.5), 1.5, 2.5);
  const TetMesh m = p.initial_mesh({2, 2, 2});
  const SolutionField u(m, interpolate_edge(m, p.exact_u));
  EXPECT_LT(eta_res(u, p).global, 1e-12);
}

TEST(EtaRes, TwoTetJumpTermsByHand) {
  // u_T = c on two tets with different coefficients and f = 0: every term
  // has a closed form
  const Vec3 c(0.4, -1.0, 0.7);
  ProblemSpec p = constant_field_problem(c);
  p.mu = [](int l) { return l == 0 ? 1.0 : 3.0; };
  p.beta = [](int l) { return l == 0 ? 2.0 : 5.0; };
  p.f = [](const Vec3&, int) { return Vec3::Zero().eval(); };
  p.div_f = [](const Vec3&, int) { return 0.0; };
  const TetMesh m = fixtures::two_tets();
  const SolutionField u(m, interpolate_edge(m, p.exact_u));
  const EstimateReport r = eta_res(u, p);

  int f = 0;
  while (m.is_boundary_face(f)) ++f;
  const Vec3& n = m.face_normal(f);
  const double normal = 0.5 * m.face_diameter(f) * sqr((2.0 - 5.0) * c.dot(n)) * m.face_area(f) / 2.0;
  for (int t = 0; t < 2; ++t) {
    const double mu = p.mu(t), beta = p.beta(t);
    const double element = mu * sqr(m.diameter(t)) * sqr(beta) * c.squaredNorm() * m.volume(t);
    EXPECT_NEAR(r.components[0][t], element, 1e-12 * element);
    EXPECT_NEAR(r.components[1][t], 0.0, 1e-14);
    EXPECT_NEAR(r.components[2][t], normal, 1e-12 * normal);
    EXPECT_NEAR(r.components[3][t], 0.0, 1e-14);
  }
}

TEST(EtaRes, InterfaceElementsCarryLargestIndicators) {
  const ProblemSpec p = example1(SourceVariant::NotHDiv);
  const TetMesh m = bisect_all(p.initial_mesh());
  const EstimateReport r = eta_res(solve_primal(m, p), p);
  const int top = static_cast<int>(std::max_element(r.indicators.begin(), r.indicators.end()) - r.indicators.begin());
  bool touches = false;
  for (int v : m.tet(top)) touches |= std::abs(m.vertex(v)[0]) < 1e-12 || std::abs(m.vertex(v)[1]) < 1e-12;
  EXPECT_TRUE(touches);
}

TEST(EtaRes, RequiresDivergenceOfSource) {
  ProblemSpec p = constant_field_problem(Vec3(1, 0, 0));
  p.div_f = nullptr;
  const TetMesh m = fixtures::unit_cube();
  EXPECT_THROW(eta_res(SolutionField(m, VectorXd::Zero(19)), p), InvalidInput);
}

TEST(DualityGap, ZeroFieldsGiveSourceNorm) {
  ProblemSpec p = constant_field_problem(Vec3::Zero(), 1.0, 3.0);
  p.f = [](const Vec3& x, int) { return Vec3(1.0 + x[0], 2.0, 3.0 * x[1]); };
  const TetMesh m = p.initial_mesh({2, 2, 2});
  const SolutionField zero(m, VectorXd::Zero(static_cast<Eigen::Index>(m.num_edges())));
  const QuadratureDegrees q{6, 6, 5};
  const DualityGap d = duality_gap(zero, zero, p, q);
  const double fnorm2 = eta_new(zero, zero, p, 6).global_sq();
  EXPECT_EQ(d.J, 0.0);
  EXPECT_NEAR(d.J_star, -0.5 * fnorm2, 1e-13 * fnorm2);
  EXPECT_NEAR(d.gap, fnorm2, 1e-13 * fnorm2);
}

TEST(DualityGap, FunctionalsMatchQuadratureOracle) {
  ProblemSpec p = constant_field_problem(Vec3::Zero());
  p.mu = [](int l) { return l == 0 ? 1.0 : 0.5; };
  p.beta = [](int l) { return l == 0 ? 2.0 : 4.0; };
  p.f = [](const Vec3& x, int) { return Vec3(x[1] * x[2], 1.0 - x[0], x[0] * x[0]); };
  const TetMesh m = fixtures::two_tets();
  std::mt19937 rng(31);
  std::normal_distribution<double> d;
  VectorXd a(9), b(9);
  for (int e = 0; e < 9; ++e) {
    a[e] = d(rng);
    b[e] = d(rng);
  }
  const SolutionField u(m, a), tau(m, b);
  const auto [J, Js] = functionals_oracle(u, tau, p);
  const DualityGap g = duality_gap(u, tau, p, QuadratureDegrees{8, 8, 5});
  EXPECT_NEAR(g.J, J, 1e-12 * (1 + std::abs(J)));
  EXPECT_NEAR(g.J_star, Js, 1e-12 * (1 + std::abs(Js)));
  EXPECT_NEAR(g.gap, 2 * (J - Js), 1e-12 * (1 + std::abs(J - Js)));
}

TEST(DualityGap, EqualsEtaSquaredForDiscreteSolutions) {
  for (const char* name : {"example1/fnothdiv", "example2/fdiv0", "example2/fnothdiv"}) {
    const ProblemSpec p = problem_by_name(name);
    const TetMesh m = bisect_all(p.initial_mesh());
    const SolutionField u = solve_primal(m, p);
    const SolutionField s = solve_auxiliary(m, p);
    const double eta2 = eta_new(u, s, p).global_sq();
    EXPECT_NEAR(duality_gap(u, s, p).gap, eta2, 1e-8 * eta2) << name;
  }
}
