#include "hcurlest/estimators.hpp"

#include "hcurlest/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace hcurlest {

namespace {

void finish(EstimateReport& r) {
  const std::size_t n = r.components.front().size();
  r.indicators.assign(n, 0.0);
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double s = 0.0;
    for (const auto& c : r.components) s += c[t];
    r.indicators[t] = std::sqrt(s);
    sum += s;
  }
  r.global = std::sqrt(sum);
}

// <(v_h x n), tau_h>_F over boundary faces with tag `tag`, with v_h the
// Whitney expansion of global edge values `dofs`.
double boundary_pairing(const TetMesh& mesh, BoundaryTag tag, const VectorXd& dofs, const DiscreteField& tau,
                        int face_degree) {
  const TriangleRule rule = triangle_rule(face_degree);
  double s = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    const auto ft = mesh.face_tag(f);
    if (!ft || *ft != tag) continue;
    const int t = mesh.face_tets(f)[0];
    const int lf = mesh.local_face(t, f);
    const WhitneyElement w(TetGeometry::of(mesh, t));
    std::array<double, 6> c;
    for (int e = 0; e < 6; ++e) c[e] = mesh.tet_edge_signs(t)[e] * dofs[mesh.tet_edges(t)[e]];
    const auto ct = tau.local_coefficients(t);
    const Vec3& n = mesh.face_normal(f);
    const auto& fv = kLocalFaces[lf];
    double sf = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Bary b{0, 0, 0, 0};
      for (int k = 0; k < 3; ++k) b[fv[k]] = rule.points[q][k];
      sf += rule.weights[q] * w.expand(c, b).cross(n).dot(w.expand(ct, b));
    }
    s += sf * mesh.face_area(f) / kRefTriangleArea;
  }
  return s;
}

bool has_faces(const TetMesh& mesh, BoundaryTag tag) {
  for (const auto& [k, v] : mesh.boundary_tags()) {
    if (v == tag) return true;
  }
  return false;
}

}  // namespace

EstimateReport eta_two_term(const DiscreteField& u, const DiscreteField& sigma, const ProblemSpec& problem,
                            int volume_degree, std::string name) {
  const TetMesh& mesh = u.mesh();
  if (&sigma.mesh() != &mesh) throw InvalidInput("estimator: u and sigma live on different meshes");
  const TetRule rule = tet_rule(volume_degree);
  EstimateReport r;
  r.name = std::move(name);
  r.component_names = {"constitutive", "equilibrium"};
  r.components.assign(2, std::vector<double>(mesh.num_tets(), 0.0));
  parallel_for(mesh.num_tets(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const WhitneyElement w(TetGeometry::of(mesh, t));
    const int label = mesh.label(t);
    const double mu = problem.mu(label);
    const double beta = problem.beta(label);
    const auto cu = u.local_coefficients(t);
    const auto cs = sigma.local_coefficients(t);
    const Vec3 curl_u = w.expand_curl(cu);
    const Vec3 curl_s = w.expand_curl(cs);
    double c0 = 0.0, c1 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bary& b = rule.points[q];
      const Vec3 x = w.geometry().point(b);
      const Vec3 uh = w.expand(cu, b);
      const Vec3 sh = w.expand(cs, b);
      c0 += rule.weights[q] * (mu * sh - curl_u).squaredNorm() / mu;
      c1 += rule.weights[q] * (curl_s + beta * uh - problem.f(x, label)).squaredNorm() / beta;
    }
    const double scale = w.geometry().volume / kRefTetVolume;
    r.components[0][t] = c0 * scale;
    r.components[1][t] = c1 * scale;
  });
  finish(r);
  return r;
}

EstimateReport eta_tilde(const SolutionField& u, const DiscreteField& sigma_tilde, const ProblemSpec& problem,
                         int volume_degree) {
  return eta_two_term(u, sigma_tilde, problem, volume_degree, "NEW_LOCAL");
}

EstimateReport eta_res(const SolutionField& u, const ProblemSpec& problem, const QuadratureDegrees& quad) {
  quad.validate();
  const TetMesh& mesh = u.mesh();
  if (!problem.div_f) throw InvalidInput("residual estimator needs the elementwise divergence of f");
  const TetRule rule = tet_rule(quad.volume);
  const TriangleRule frule = triangle_rule(quad.face);
  const std::size_t nt = mesh.num_tets();

  EstimateReport r;
  r.name = "RES";
  r.component_names = {"element", "divergence", "normal_jump", "tangential_jump"};
  r.components.assign(4, std::vector<double>(nt, 0.0));

  // volume terms; curl(mu^{-1} curl u_T) and div u_T vanish elementwise
  parallel_for(nt, [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const WhitneyElement w(TetGeometry::of(mesh, t));
    const int label = mesh.label(t);
    const double mu = problem.mu(label);
    const double beta = problem.beta(label);
    const auto cu = u.local_coefficients(t);
    double res = 0.0, div = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bary& b = rule.points[q];
      const Vec3 x = w.geometry().point(b);
      res += rule.weights[q] * (problem.f(x, label) - beta * w.expand(cu, b)).squaredNorm();
      div += rule.weights[q] * sqr(problem.div_f(x, label));
    }
    const double scale = w.geometry().volume / kRefTetVolume;
    const double h2 = sqr(mesh.diameter(t));
    r.components[0][t] = mu * h2 * res * scale;
    r.components[1][t] = h2 * div * scale / beta;
  });

  // face jumps, one face at a time; each side receives its h_F/2 share
  std::vector<double> normal(mesh.num_faces(), 0.0), tangential(mesh.num_faces(), 0.0);
  parallel_for(mesh.num_faces(), [&](std::size_t fi) {
    const int f = static_cast<int>(fi);
    if (mesh.is_boundary_face(f)) return;
    const auto& ft = mesh.face_tets(f);
    const auto& fk = mesh.face(f);
    const int l0 = mesh.label(ft[0]);
    const int l1 = mesh.label(ft[1]);
    const double mu0 = problem.mu(l0), mu1 = problem.mu(l1);
    const double beta0 = problem.beta(l0), beta1 = problem.beta(l1);
    const double mu_f = std::max(mu0, mu1);
    const double beta_f = std::min(beta0, beta1);
    const WhitneyElement w0(TetGeometry::of(mesh, ft[0]));
    const WhitneyElement w1(TetGeometry::of(mesh, ft[1]));
    const auto c0 = u.local_coefficients(ft[0]);
    const auto c1 = u.local_coefficients(ft[1]);
    const Vec3& n = mesh.face_normal(f);
    const Vec3 tj = (w0.expand_curl(c0) / mu0 - w1.expand_curl(c1) / mu1).cross(n);
    double nj = 0.0;
    for (std::size_t q = 0; q < frule.size(); ++q) {
      Bary b0{0, 0, 0, 0}, b1{0, 0, 0, 0};
      for (int k = 0; k < 3; ++k) {
        b0[mesh.local_vertex(ft[0], fk[k])] = frule.points[q][k];
        b1[mesh.local_vertex(ft[1], fk[k])] = frule.points[q][k];
      }
      nj += frule.weights[q] * sqr((beta0 * w0.expand(c0, b0) - beta1 * w1.expand(c1, b1)).dot(n));
    }
    const double area = mesh.face_area(f);
    const double half_h = 0.5 * mesh.face_diameter(f);
    normal[f] = half_h * nj * area / kRefTriangleArea / beta_f;
    tangential[f] = half_h * mu_f * tj.squaredNorm() * area;
  });
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    if (mesh.is_boundary_face(f)) continue;
    for (int t : mesh.face_tets(f)) {
      r.components[2][t] += normal[f];
      r.components[3][t] += tangential[f];
    }
  }
  finish(r);
  return r;
}

DualityGap duality_gap(const SolutionField& u, const SolutionField& sigma, const ProblemSpec& problem,
                       const QuadratureDegrees& quad) {
  quad.validate();
  const TetMesh& mesh = u.mesh();
  if (&sigma.mesh() != &mesh) throw InvalidInput("duality_gap: u and sigma live on different meshes");
  const TetRule rule = tet_rule(quad.volume);
  double energy = 0.0, load = 0.0, comp_mass = 0.0, comp_res = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
    const WhitneyElement w(TetGeometry::of(mesh, t));
    const int label = mesh.label(t);
    const double mu = problem.mu(label);
    const double beta = problem.beta(label);
    const auto cu = u.local_coefficients(t);
    const auto cs = sigma.local_coefficients(t);
    const Vec3 curl_u = w.expand_curl(cu);
    const Vec3 curl_s = w.expand_curl(cs);
    double e = 0.0, l = 0.0, m = 0.0, rr = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bary& b = rule.points[q];
      const Vec3 x = w.geometry().point(b);
      const Vec3 fx = problem.f(x, label);
      const Vec3 uh = w.expand(cu, b);
      const Vec3 sh = w.expand(cs, b);
      e += rule.weights[q] * (curl_u.squaredNorm() / mu + beta * uh.squaredNorm());
      l += rule.weights[q] * fx.dot(uh);
      m += rule.weights[q] * mu * sh.squaredNorm();
      rr += rule.weights[q] * (fx - curl_s).squaredNorm() / beta;
    }
    const double scale = w.geometry().volume / kRefTetVolume;
    energy += e * scale;
    load += l * scale;
    comp_mass += m * scale;
    comp_res += rr * scale;
  }
  double neumann = 0.0, dirichlet = 0.0;
  if (has_faces(mesh, BoundaryTag::Neumann)) {
    if (!problem.neumann_field) throw InvalidInput("mesh has Neumann faces but the problem defines no Neumann data");
    neumann = boundary_pairing(mesh, BoundaryTag::Neumann, interpolate_edge(mesh, problem.neumann_field, quad.edge), u,
                               quad.face);
  }
  if (has_faces(mesh, BoundaryTag::Dirichlet)) {
    dirichlet = boundary_pairing(mesh, BoundaryTag::Dirichlet,
                                 interpolate_edge(mesh, problem.dirichlet_field, quad.edge), sigma, quad.face);
  }
  DualityGap g;
  g.J = 0.5 * energy - load - neumann;
  g.J_star = -0.5 * comp_mass - 0.5 * comp_res - dirichlet;
  g.gap = 2.0 * (g.J - g.J_star);
  return g;
}

}  // namespace hcurlest
