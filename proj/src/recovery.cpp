#include "hcurlest/recovery.hpp"

#include "hcurlest/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hcurlest {

BrokenField::BrokenField(const TetMesh& mesh, std::vector<std::array<double, 6>> coefficients)
    : mesh_(&mesh), c_(std::move(coefficients)) {
  if (c_.size() != mesh.num_tets()) throw InvalidInput("broken field needs one coefficient set per tet");
}

MatrixXd PatchSystem::constraint_matrix(bool kept_only) const {
  std::vector<const PatchConstraint*> rows;
  for (const auto& c : constraints) {
    if (c.kept || !kept_only) rows.push_back(&c);
  }
  MatrixXd B = MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), num_unknowns());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    B(r, rows[r]->first) += 1.0;
    if (rows[r]->second >= 0) B(r, rows[r]->second) -= 1.0;
  }
  return B;
}

VectorXd PatchSystem::constraint_values(bool kept_only) const {
  std::vector<double> v;
  for (const auto& c : constraints) {
    if (c.kept || !kept_only) v.push_back(c.value);
  }
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MatrixXd PatchSystem::dense_matrix() const {
  const int n = num_unknowns();
  MatrixXd A = MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < blocks.size(); ++i) A.block(6 * i, 6 * i, 6, 6) = blocks[i];
  return A;
}

std::vector<std::array<double, 6>> constitutive_circulations(const SolutionField& u, const ProblemSpec& problem) {
  const TetMesh& mesh = u.mesh();
  std::vector<std::array<double, 6>> out(mesh.num_tets());
  for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
    const WhitneyElement w(TetGeometry::of(mesh, t));
    const Vec3 wk = w.expand_curl(u.local_coefficients(t)) / problem.mu(mesh.label(t));
    const auto& tv = mesh.tet(t);
    for (int e = 0; e < 6; ++e) {
      const auto& [i, j] = kLocalEdges[e];
      out[t][e] = mesh.tet_edge_signs(t)[e] * wk.dot(mesh.vertex(tv[j]) - mesh.vertex(tv[i]));
    }
  }
  return out;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<int> parent_;
};

// local edges of the tet lying on local face lf
std::array<int, 3> face_edges(int lf) {
  std::array<int, 3> out{};
  int k = 0;
  for (int e = 0; e < 6; ++e) {
    if (kLocalEdges[e][0] != lf && kLocalEdges[e][1] != lf) out[k++] = e;
  }
  return out;
}

bool edge_has(int e, int local_vertex) { return kLocalEdges[e][0] == local_vertex || kLocalEdges[e][1] == local_vertex; }

PatchSystem build_impl(const SolutionField& u, const ProblemSpec& problem, int z, const TetRule& rule,
                       const std::vector<std::array<double, 6>>& W, const VectorXd* neumann) {
  const TetMesh& mesh = u.mesh();
  const VertexPatch vp = vertex_patch(mesh, z);
  PatchSystem ps;
  ps.center = z;
  ps.tets = vp.tets;
  const int nk = static_cast<int>(vp.tets.size());
  ps.rbar.resize(nk);
  ps.blocks.resize(nk);
  ps.rhs = VectorXd::Zero(6 * nk);
  auto slot = [&](int t) {
    const auto it = std::find(ps.tets.begin(), ps.tets.end(), t);
    return static_cast<int>(it - ps.tets.begin());
  };

  std::vector<PatchConstraint> prescribed;
  for (int i = 0; i < nk; ++i) {
    const int t = vp.tets[i];
    const int cz = vp.center_local[i];
    const int label = mesh.label(t);
    const double mu = problem.mu(label);
    const double beta = problem.beta(label);
    const TetGeometry geo = TetGeometry::of(mesh, t);
    const WhitneyElement ws(geo, mesh.tet_edge_signs(t));
    const WhitneyElement wl(geo);
    const LocalMatrices lm = local_matrices(ws);
    ps.blocks[i] = lm.curlcurl / beta + mu * lm.mass;

    const auto cu = u.local_coefficients(t);
    Vec3 r = Vec3::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Bary& b = rule.points[q];
      r += rule.weights[q] * b[cz] * (problem.f(geo.point(b), label) - beta * wl.expand(cu, b));
    }
    ps.rbar[i] = r / kRefTetVolume;
    for (int e = 0; e < 6; ++e) ps.rhs[6 * i + e] = geo.volume / beta * ps.rbar[i].dot(ws.curl(e));

    for (int lf = 0; lf < 4; ++lf) {
      const int f = mesh.tet_faces(t)[lf];
      const auto tag = mesh.face_tag(f);
      const bool opposite = lf == cz;
      if (tag && *tag == BoundaryTag::Dirichlet) continue;
      if (!tag && !opposite) continue;  // jump face, handled below
      for (int e : face_edges(lf)) {
        double value = 0.0;
        if (tag && edge_has(e, cz)) {
          // Neumann face: l_z (sigma_N - w_K) has half the edge circulation
          value = 0.5 * ((*neumann)[mesh.tet_edges(t)[e]] - W[t][e]);
        }
        prescribed.push_back({PatchConstraint::Kind::Prescribed, 6 * i + e, -1, value, true});
      }
    }
  }

  std::vector<PatchConstraint> jumps;
  for (int f : vp.interior_faces) {
    const auto& ft = mesh.face_tets(f);
    const int i1 = slot(ft[0]);
    const int i2 = slot(ft[1]);
    const auto& fk = mesh.face(f);
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        const int e1 = local_edge_index(mesh.local_vertex(ft[0], fk[a]), mesh.local_vertex(ft[0], fk[b]));
        const int e2 = local_edge_index(mesh.local_vertex(ft[1], fk[a]), mesh.local_vertex(ft[1], fk[b]));
        const bool has_z = fk[a] == z || fk[b] == z;
        const double value = has_z ? -0.5 * (W[ft[0]][e1] - W[ft[1]][e2]) : 0.0;
        jumps.push_back({PatchConstraint::Kind::Jump, 6 * i1 + e1, 6 * i2 + e2, value, true});
      }
    }
  }

  DisjointSets sets(6 * nk + 1);
  const int ground = 6 * nk;
  for (auto& c : prescribed) c.kept = sets.unite(c.first, ground);
  for (auto& c : jumps) c.kept = sets.unite(c.first, c.second);
  ps.constraints = std::move(prescribed);
  ps.constraints.insert(ps.constraints.end(), jumps.begin(), jumps.end());
  return ps;
}

VectorXd neumann_circulations(const TetMesh& mesh, const ProblemSpec& problem) {
  for (const auto& [k, v] : mesh.boundary_tags()) {
    if (v == BoundaryTag::Neumann) {
      if (!problem.neumann_field) throw InvalidInput("mesh has Neumann faces but the problem defines no Neumann data");
      return interpolate_edge(mesh, problem.neumann_field);
    }
  }
  return VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_edges()));
}

}  // namespace

PatchSystem build_patch_system(const SolutionField& u, const ProblemSpec& problem, int z, int volume_degree) {
  if (z < 0 || static_cast<std::size_t>(z) >= u.mesh().num_vertices()) throw InvalidInput("patch center out of range");
  const auto W = constitutive_circulations(u, problem);
  const VectorXd gn = neumann_circulations(u.mesh(), problem);
  return build_impl(u, problem, z, tet_rule(volume_degree), W, &gn);
}

PatchSolution solve_patch_system(const PatchSystem& system) {
  PatchSolution out;
  try {
    const SaddleSolution s =
        block_saddle_solve(system.blocks, system.constraint_matrix(true), system.rhs, system.constraint_values(true));
    out.coefficients = s.primal;
    out.multipliers = s.multiplier;
  } catch (const NumericalFailure& e) {
    throw NumericalFailure("patch of vertex " + std::to_string(system.center) + ": " + e.what());
  }
  for (const auto& c : system.constraints) {
    double v = out.coefficients[c.first];
    if (c.second >= 0) v -= out.coefficients[c.second];
    out.max_constraint_residual = std::max(out.max_constraint_residual, std::abs(v - c.value));
  }
  return out;
}

LocalRecovery recover_local(const SolutionField& u, const ProblemSpec& problem, int volume_degree) {
  const TetMesh& mesh = u.mesh();
  const auto W = constitutive_circulations(u, problem);
  const VectorXd gn = neumann_circulations(mesh, problem);
  const TetRule rule = tet_rule(volume_degree);
  const std::size_t nv = mesh.num_vertices();

  std::vector<std::vector<int>> patch_tets(nv);
  std::vector<VectorXd> patch_coeffs(nv);
  std::vector<double> residual(nv, 0.0);
  parallel_for(nv, [&](std::size_t z) {
    const PatchSystem ps = build_impl(u, problem, static_cast<int>(z), rule, W, &gn);
    const PatchSolution sol = solve_patch_system(ps);
    patch_tets[z] = ps.tets;
    patch_coeffs[z] = sol.coefficients;
    residual[z] = sol.max_constraint_residual;
  });

  std::vector<std::array<double, 6>> corr(mesh.num_tets(), std::array<double, 6>{});
  for (std::size_t z = 0; z < nv; ++z) {
    for (std::size_t i = 0; i < patch_tets[z].size(); ++i) {
      for (int e = 0; e < 6; ++e) corr[patch_tets[z][i]][e] += patch_coeffs[z][6 * i + e];
    }
  }
  double scale = 0.0;
  for (const auto& w : W) {
    for (double v : w) scale = std::max(scale, std::abs(v));
  }
  std::vector<std::array<double, 6>> total(mesh.num_tets());
  for (int t = 0; t < static_cast<int>(mesh.num_tets()); ++t) {
    for (int e = 0; e < 6; ++e) {
      const double s = mesh.tet_edge_signs(t)[e];
      total[t][e] = s * (corr[t][e] + W[t][e]);
      corr[t][e] *= s;
    }
  }
  const double worst = *std::max_element(residual.begin(), residual.end());
  LocalRecovery out{BrokenField(mesh, std::move(total)), BrokenField(mesh, std::move(corr)),
                    scale > 0 ? worst / scale : worst};
  return out;
}

}  // namespace hcurlest
