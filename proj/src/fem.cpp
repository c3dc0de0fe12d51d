#include "hcurlest/fem.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace hcurlest {

TetGeometry TetGeometry::of(const std::array<Vec3, 4>& x) {
  TetGeometry g;
  g.x = x;
  Mat3 J;
  for (int i = 0; i < 3; ++i) J.col(i) = x[i + 1] - x[0];
  const double det = J.determinant();
  g.volume = std::abs(det) / 6.0;
  double h = 0.0;
  for (const auto& le : kLocalEdges) h = std::max(h, (x[le[0]] - x[le[1]]).norm());
  if (!(g.volume > 1e-14 * h * h * h)) throw InvalidInput("degenerate tet with zero volume");
  // rows of J^{-1} are the gradients of l_1..l_3
  const Mat3 Jinv = J.inverse();
  g.grad[1] = Jinv.row(0).transpose();
  g.grad[2] = Jinv.row(1).transpose();
  g.grad[3] = Jinv.row(2).transpose();
  g.grad[0] = -(g.grad[1] + g.grad[2] + g.grad[3]);
  return g;
}

TetGeometry TetGeometry::of(const TetMesh& mesh, int t) {
  const auto& tv = mesh.tet(t);
  return of({mesh.vertex(tv[0]), mesh.vertex(tv[1]), mesh.vertex(tv[2]), mesh.vertex(tv[3])});
}

WhitneyElement::WhitneyElement(const TetGeometry& g, const std::array<std::int8_t, 6>& signs) : g_(g) {
  for (int e = 0; e < 6; ++e) {
    sign_[e] = signs[e];
    const auto& [i, j] = kLocalEdges[e];
    curls_[e] = sign_[e] * 2.0 * g_.grad[i].cross(g_.grad[j]);
  }
}

WhitneyElement::WhitneyElement(const TetGeometry& g) : WhitneyElement(g, {1, 1, 1, 1, 1, 1}) {}

Vec3 WhitneyElement::value(int e, const Bary& b) const {
  const auto& [i, j] = kLocalEdges[e];
  return sign_[e] * (b[i] * g_.grad[j] - b[j] * g_.grad[i]);
}

std::array<Vec3, 6> WhitneyElement::values(const Bary& b) const {
  std::array<Vec3, 6> out;
  for (int e = 0; e < 6; ++e) out[e] = value(e, b);
  return out;
}

Vec3 WhitneyElement::expand(const std::array<double, 6>& c, const Bary& b) const {
  Vec3 v = Vec3::Zero();
  for (int e = 0; e < 6; ++e) v += c[e] * value(e, b);
  return v;
}

Vec3 WhitneyElement::expand_curl(const std::array<double, 6>& c) const {
  Vec3 v = Vec3::Zero();
  for (int e = 0; e < 6; ++e) v += c[e] * curls_[e];
  return v;
}

LocalMatrices local_matrices(const WhitneyElement& w) {
  LocalMatrices m;
  const double vol = w.geometry().volume;
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) m.curlcurl(a, b) = vol * w.curl(a).dot(w.curl(b));
  }
  m.mass.setZero();
  static const TetRule rule = tet_rule(2);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto W = w.values(rule.points[q]);
    const double wq = rule.weights[q] * vol / kRefTetVolume;
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) m.mass(a, b) += wq * W[a].dot(W[b]);
    }
  }
  return m;
}

EdgeSpace::EdgeSpace(const TetMesh& mesh, FieldKind kind) : mesh_(&mesh), kind_(kind) {
  const int ne = static_cast<int>(mesh.num_edges());
  essential_.assign(ne, 0);
  for (int e = 0; e < ne; ++e) {
    const bool ess = kind == FieldKind::Primal ? mesh.edge_on_dirichlet(e) : mesh.edge_on_neumann(e);
    essential_[e] = ess ? 1 : 0;
    (ess ? fixed_ : free_).push_back(e);
  }
}

Vec3 DiscreteField::value(int t, const Bary& b) const {
  const WhitneyElement w(TetGeometry::of(mesh(), t));
  return w.expand(local_coefficients(t), b);
}

Vec3 DiscreteField::curl(int t) const {
  const WhitneyElement w(TetGeometry::of(mesh(), t));
  return w.expand_curl(local_coefficients(t));
}

SolutionField::SolutionField(const TetMesh& mesh, VectorXd coefficients) : mesh_(&mesh), c_(std::move(coefficients)) {
  if (c_.size() != static_cast<Eigen::Index>(mesh.num_edges())) {
    throw InvalidInput("solution coefficient count does not match the edge count");
  }
}

std::array<double, 6> SolutionField::local_coefficients(int t) const {
  std::array<double, 6> c;
  const auto& edges = mesh_->tet_edges(t);
  const auto& signs = mesh_->tet_edge_signs(t);
  for (int e = 0; e < 6; ++e) c[e] = signs[e] * c_[edges[e]];
  return c;
}

void QuadratureDegrees::validate() const {
  if (volume < 2 || face < 2 || edge < 1 || volume > 40 || face > 40 || edge > 40) {
    throw InvalidInput("quadrature degrees must lie in [2, 40] (volume, face) and [1, 40] (edge)");
  }
}

int edge_label(const TetMesh& mesh, int e) {
  const auto& ek = mesh.edge(e);
  int best = -1;
  for (int t : mesh.vertex_tets(ek[0])) {
    if (mesh.local_vertex(t, ek[1]) < 0) continue;
    best = best < 0 ? mesh.label(t) : std::min(best, mesh.label(t));
  }
  return best;
}

namespace {

// Composite Gauss rule on the unit parameter interval, refined globally
// adaptively: the panel whose one-piece and two-piece values disagree most
// is split until the summed disagreement drops below tol or the panel
// budget is spent. Cheap for smooth fields; resolves integrable endpoint
// singularities.
double edge_circulation(const LineRule& rule, const std::function<double(double)>& g, double rel_tol) {
  struct Panel {
    double a, b, value, err;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  double mag = 0.0;
  auto piece = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double v = rule.weights[q] * g(a + rule.points[q][1] * (b - a));
      s += v;
      mag = std::max(mag, std::abs(v) * (b - a));
    }
    return (b - a) * s;
  };
  auto split = [&](double a, double b, double whole) {
    const double m = 0.5 * (a + b);
    const double l = piece(a, m);
    const double r = piece(m, b);
    const double err = std::abs(l + r - whole);
    return std::pair{Panel{a, m, l, 0.5 * err}, Panel{m, b, r, 0.5 * err}};
  };
  std::priority_queue<Panel> panels;
  const auto [l0, r0] = split(0.0, 1.0, piece(0.0, 1.0));
  panels.push(l0);
  panels.push(r0);
  double err = l0.err + r0.err;
  constexpr std::size_t kMaxPanels = 400;
  while (err > rel_tol * mag && panels.size() < kMaxPanels) {
    const Panel worst = panels.top();
    panels.pop();
    const auto [l, r] = split(worst.a, worst.b, worst.value);
    err += l.err + r.err - worst.err;
    panels.push(l);
    panels.push(r);
  }
  double total = 0.0;
  while (!panels.empty()) {
    total += panels.top().value;
    panels.pop();
  }
  return total;
}

}  // namespace

VectorXd interpolate_edge(const TetMesh& mesh, const VectorField& field, std::span<const int> edges, int degree) {
  const LineRule rule = line_rule(degree);
  VectorXd out = VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_edges()));
  for (int e : edges) {
    const auto& ek = mesh.edge(e);
    const Vec3& a = mesh.vertex(ek[0]);
    const Vec3& b = mesh.vertex(ek[1]);
    const Vec3 tvec = b - a;
    const int label = edge_label(mesh, e);
    const auto g = [&](double s) { return field(a + s * tvec, label).dot(tvec); };
    out[e] = edge_circulation(rule, g, 1e-12);
  }
  return out;
}

VectorXd interpolate_edge(const TetMesh& mesh, const VectorField& field, int degree) {
  std::vector<int> all(mesh.num_edges());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
  return interpolate_edge(mesh, field, all, degree);
}

CsrMatrix assemble_curlcurl_mass(const TetMesh& mesh, const std::function<double(int)>& curl_weight,
                                 const std::function<double(int)>& mass_weight) {
  std::vector<Triplet> trip;
  trip.reserve(36 * mesh.num_tets());
  for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
    const double a = curl_weight(mesh.label(t));
    const double b = mass_weight(mesh.label(t));
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("coefficients mu and beta must be positive");
    const WhitneyElement w(TetGeometry::of(mesh, t), mesh.tet_edge_signs(t));
    const LocalMatrices lm = local_matrices(w);
    const auto& edges = mesh.tet_edges(t);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) trip.push_back({edges[i], edges[j], a * lm.curlcurl(i, j) + b * lm.mass(i, j)});
    }
  }
  return CsrMatrix::from_triplets(static_cast<int>(mesh.num_edges()), std::move(trip));
}

namespace {

// sum over boundary faces with tag `tag` of <(v_h x n), W_i>_F where v_h is
// the Whitney expansion of `dofs` (only the face edges matter).
void add_boundary_trace_term(const TetMesh& mesh, BoundaryTag tag, const VectorXd& dofs, double factor,
                             int face_degree, VectorXd& rhs) {
  const TriangleRule rule = triangle_rule(face_degree);
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    const auto ft = mesh.face_tag(f);
    if (!ft || *ft != tag) continue;
    const int t = mesh.face_tets(f)[0];
    const int lf = mesh.local_face(t, f);
    const WhitneyElement w(TetGeometry::of(mesh, t), mesh.tet_edge_signs(t));
    const auto& edges = mesh.tet_edges(t);
    std::array<double, 6> c;
    for (int e = 0; e < 6; ++e) c[e] = dofs[edges[e]];
    const Vec3& n = mesh.face_normal(f);
    const auto& fv = kLocalFaces[lf];
    const double scale = mesh.face_area(f) / kRefTriangleArea;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Bary b{0, 0, 0, 0};
      for (int k = 0; k < 3; ++k) b[fv[k]] = rule.points[q][k];
      const Vec3 g = w.expand(c, b).cross(n);
      const auto W = w.values(b);
      for (int e = 0; e < 6; ++e) rhs[edges[e]] += factor * rule.weights[q] * scale * g.dot(W[e]);
    }
  }
}

bool has_faces(const TetMesh& mesh, BoundaryTag tag) {
  for (const auto& [k, v] : mesh.boundary_tags()) {
    if (v == tag) return true;
  }
  return false;
}

LinearSystem finish_system(const EdgeSpace& space, CsrMatrix A, VectorXd rhs, VectorXd essential) {
  LinearSystem s;
  s.matrix = std::move(A);
  s.rhs = std::move(rhs);
  s.essential_values = VectorXd::Zero(space.num_dofs());
  for (int e : space.essential_dofs()) s.essential_values[e] = essential[e];
  s.free_dofs = space.free_dofs();
  s.essential_dofs = space.essential_dofs();
  return s;
}

}  // namespace

LinearSystem assemble_primal(const TetMesh& mesh, const ProblemSpec& problem, const QuadratureDegrees& quad) {
  quad.validate();
  const EdgeSpace space(mesh, FieldKind::Primal);
  auto inv_mu = [&](int l) { return 1.0 / problem.mu(l); };
  for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
    if (!(problem.mu(mesh.label(t)) > 0.0)) throw InvalidInput("coefficient mu must be positive");
  }
  CsrMatrix A = assemble_curlcurl_mass(mesh, inv_mu, problem.beta);

  VectorXd rhs = VectorXd::Zero(space.num_dofs());
  const TetRule rule = tet_rule(quad.volume);
  for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
    const WhitneyElement w(TetGeometry::of(mesh, t), mesh.tet_edge_signs(t));
    const int label = mesh.label(t);
    const double scale = w.geometry().volume / kRefTetVolume;
    const auto& edges = mesh.tet_edges(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3 fx = problem.f(w.geometry().point(rule.points[q]), label);
      const auto W = w.values(rule.points[q]);
      for (int e = 0; e < 6; ++e) rhs[edges[e]] += rule.weights[q] * scale * fx.dot(W[e]);
    }
  }
  if (has_faces(mesh, BoundaryTag::Neumann)) {
    if (!problem.neumann_field) throw InvalidInput("mesh has Neumann faces but the problem defines no Neumann data");
    const VectorXd gn = interpolate_edge(mesh, problem.neumann_field, quad.edge);
    add_boundary_trace_term(mesh, BoundaryTag::Neumann, gn, 1.0, quad.face, rhs);
  }
  VectorXd gd = VectorXd::Zero(space.num_dofs());
  if (!space.essential_dofs().empty()) gd = interpolate_edge(mesh, problem.dirichlet_field, space.essential_dofs(), quad.edge);
  return finish_system(space, std::move(A), std::move(rhs), std::move(gd));
}

LinearSystem assemble_auxiliary(const TetMesh& mesh, const ProblemSpec& problem, const QuadratureDegrees& quad) {
  quad.validate();
  const EdgeSpace space(mesh, FieldKind::Auxiliary);
  auto inv_beta = [&](int l) { return 1.0 / problem.beta(l); };
  for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
    if (!(problem.beta(mesh.label(t)) > 0.0)) throw InvalidInput("coefficient beta must be positive");
  }
  CsrMatrix A = assemble_curlcurl_mass(mesh, inv_beta, problem.mu);

  VectorXd rhs = VectorXd::Zero(space.num_dofs());
  const TetRule rule = tet_rule(quad.volume);
  for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
    const WhitneyElement w(TetGeometry::of(mesh, t), mesh.tet_edge_signs(t));
    const int label = mesh.label(t);
    const double scale = w.geometry().volume / kRefTetVolume / problem.beta(label);
    Vec3 fint = Vec3::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      fint += rule.weights[q] * problem.f(w.geometry().point(rule.points[q]), label);
    }
    const auto& edges = mesh.tet_edges(t);
    for (int e = 0; e < 6; ++e) rhs[edges[e]] += scale * fint.dot(w.curl(e));
  }
  if (has_faces(mesh, BoundaryTag::Dirichlet)) {
    const EdgeSpace primal(mesh, FieldKind::Primal);
    const VectorXd gd = interpolate_edge(mesh, problem.dirichlet_field, primal.essential_dofs(), quad.edge);
    add_boundary_trace_term(mesh, BoundaryTag::Dirichlet, gd, -1.0, quad.face, rhs);
  }
  VectorXd gn = VectorXd::Zero(space.num_dofs());
  if (!space.essential_dofs().empty()) {
    if (!problem.neumann_field) throw InvalidInput("mesh has Neumann faces but the problem defines no Neumann data");
    gn = interpolate_edge(mesh, problem.neumann_field, space.essential_dofs(), quad.edge);
  }
  return finish_system(space, std::move(A), std::move(rhs), std::move(gn));
}

FieldSolve solve(const LinearSystem& system, const SolveConfig& config) {
  FieldSolve out;
  out.coefficients = system.essential_values;
  const VectorXd lifted = system.rhs - system.matrix * system.essential_values;
  const CsrMatrix Aff = system.matrix.principal_submatrix(system.free_dofs);
  VectorXd bf(static_cast<Eigen::Index>(system.free_dofs.size()));
  for (std::size_t i = 0; i < system.free_dofs.size(); ++i) bf[i] = lifted[system.free_dofs[i]];
  out.stats = pcg(Aff, bf, config);
  for (std::size_t i = 0; i < system.free_dofs.size(); ++i) out.coefficients[system.free_dofs[i]] = out.stats.x[i];
  return out;
}

ErrorReport energy_error(const DiscreteField* field, const TetMesh& mesh, const VectorField& exact,
                         const VectorField& exact_curl, const std::function<double(int)>& curl_weight,
                         const std::function<double(int)>& mass_weight, int degree) {
  if (field && &field->mesh() != &mesh) throw InvalidInput("energy_error: field lives on a different mesh");
  const TetRule rule = tet_rule(degree);
  ErrorReport r;
  r.element_sq.resize(mesh.num_tets());
  double sum = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
    // local_coefficients() are already in local orientation
    const WhitneyElement w(TetGeometry::of(mesh, t));
    const int label = mesh.label(t);
    const double a = curl_weight(label);
    const double b = mass_weight(label);
    std::array<double, 6> c{};
    Vec3 ch = Vec3::Zero();
    if (field) {
      c = field->local_coefficients(t);
      ch = w.expand_curl(c);
    }
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3 x = w.geometry().point(rule.points[q]);
      const Vec3 vh = field ? w.expand(c, rule.points[q]) : Vec3::Zero();
      s += rule.weights[q] * (a * (exact_curl(x, label) - ch).squaredNorm() + b * (exact(x, label) - vh).squaredNorm());
    }
    r.element_sq[t] = s * w.geometry().volume / kRefTetVolume;
    sum += r.element_sq[t];
  }
  r.total = std::sqrt(sum);
  return r;
}

ErrorReport primal_energy_error(const DiscreteField& u, const ProblemSpec& problem, int degree) {
  auto inv_mu = [&](int l) { return 1.0 / problem.mu(l); };
  return energy_error(&u, u.mesh(), problem.exact_u, problem.exact_curl_u, inv_mu, problem.beta, degree);
}

ErrorReport auxiliary_energy_error(const DiscreteField& sigma, const ProblemSpec& problem, int degree) {
  auto inv_beta = [&](int l) { return 1.0 / problem.beta(l); };
  VectorField curl_sigma = [&](const Vec3& x, int l) { return problem.exact_curl_sigma(x, l); };
  return energy_error(&sigma, sigma.mesh(), problem.exact_sigma, curl_sigma, inv_beta, problem.mu, degree);
}

std::vector<double> tangential_jumps(const DiscreteField& v, int face_degree) {
  const TetMesh& mesh = v.mesh();
  const TriangleRule rule = triangle_rule(face_degree);
  std::vector<double> out(mesh.num_faces(), 0.0);
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    if (mesh.is_boundary_face(f)) continue;
    const auto& ft = mesh.face_tets(f);
    const auto& fk = mesh.face(f);
    const WhitneyElement w0(TetGeometry::of(mesh, ft[0]));
    const WhitneyElement w1(TetGeometry::of(mesh, ft[1]));
    const auto c0 = v.local_coefficients(ft[0]);
    const auto c1 = v.local_coefficients(ft[1]);
    const Vec3& n = mesh.face_normal(f);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Bary b0{0, 0, 0, 0}, b1{0, 0, 0, 0};
      for (int k = 0; k < 3; ++k) {
        b0[mesh.local_vertex(ft[0], fk[k])] = rule.points[q][k];
        b1[mesh.local_vertex(ft[1], fk[k])] = rule.points[q][k];
      }
      const Vec3 jump = (w0.expand(c0, b0) - w1.expand(c1, b1)).cross(n);
      s += rule.weights[q] * jump.squaredNorm();
    }
    out[f] = std::sqrt(s * mesh.face_area(f) / kRefTriangleArea);
  }
  return out;
}

}  // namespace hcurlest
