#include "hcurlest/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace hcurlest {

namespace {

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(k[0]) << 32) ^
                                      static_cast<std::uint64_t>(static_cast<std::uint32_t>(k[1])));
  }
};

constexpr int kMaxClosureRounds = 10000;

}  // namespace

FaceKey make_face_key(int a, int b, int c) {
  FaceKey k{a, b, c};
  std::sort(k.begin(), k.end());
  return k;
}

int local_edge_index(int a, int b) {
  if (a > b) std::swap(a, b);
  for (int e = 0; e < 6; ++e) {
    if (kLocalEdges[e][0] == a && kLocalEdges[e][1] == b) return e;
  }
  return -1;
}

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

MeshTopology derive_entities(std::span<const std::array<int, 4>> tets, std::size_t num_vertices) {
  MeshTopology topo;
  const std::size_t nt = tets.size();
  topo.tet_edges.resize(nt);
  topo.tet_edge_signs.resize(nt);
  topo.tet_faces.resize(nt);

  for (const auto& t : tets) {
    for (int v : t) {
      if (v < 0 || static_cast<std::size_t>(v) >= num_vertices) {
        throw InvalidInput("tet references vertex id out of range");
      }
    }
  }

  {
    std::vector<std::pair<EdgeKey, std::size_t>> slots;
    slots.reserve(6 * nt);
    for (std::size_t t = 0; t < nt; ++t) {
      for (int le = 0; le < 6; ++le) {
        const int a = tets[t][kLocalEdges[le][0]];
        const int b = tets[t][kLocalEdges[le][1]];
        topo.tet_edge_signs[t][le] = a < b ? 1 : -1;
        slots.emplace_back(make_edge_key(a, b), 6 * t + le);
      }
    }
    std::sort(slots.begin(), slots.end());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (i == 0 || slots[i].first != slots[i - 1].first) topo.edges.push_back(slots[i].first);
      const std::size_t s = slots[i].second;
      topo.tet_edges[s / 6][s % 6] = static_cast<int>(topo.edges.size()) - 1;
    }
  }

  {
    std::vector<std::pair<FaceKey, std::size_t>> slots;
    slots.reserve(4 * nt);
    for (std::size_t t = 0; t < nt; ++t) {
      for (int lf = 0; lf < 4; ++lf) {
        const auto& lv = kLocalFaces[lf];
        slots.emplace_back(make_face_key(tets[t][lv[0]], tets[t][lv[1]], tets[t][lv[2]]), 4 * t + lf);
      }
    }
    std::sort(slots.begin(), slots.end());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const std::size_t s = slots[i].second;
      const int t = static_cast<int>(s / 4);
      if (i == 0 || slots[i].first != slots[i - 1].first) {
        topo.faces.push_back(slots[i].first);
        topo.face_tets.push_back({t, -1});
      } else {
        auto& ft = topo.face_tets.back();
        if (ft[1] >= 0) throw InvalidInput("non-manifold mesh: face shared by more than two tets");
        ft[1] = t;
        if (ft[1] < ft[0]) std::swap(ft[0], ft[1]);
      }
      topo.tet_faces[t][s % 4] = static_cast<int>(topo.faces.size()) - 1;
    }
  }
  return topo;
}

TetMesh::TetMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets, std::vector<int> labels,
                 std::vector<BisectionTag> bisection, std::map<FaceKey, BoundaryTag> boundary_tags)
    : vertices_(std::move(vertices)),
      tets_(std::move(tets)),
      labels_(std::move(labels)),
      bisection_(std::move(bisection)),
      boundary_tags_(std::move(boundary_tags)) {
  const std::size_t nt = tets_.size();
  if (nt == 0) throw InvalidInput("mesh has no tets");
  if (labels_.size() != nt) throw InvalidInput("label count does not match tet count");
  if (bisection_.size() != nt) throw InvalidInput("bisection tag count does not match tet count");

  volumes_.resize(nt);
  diameters_.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    auto& tv = tets_[t];
    for (int v : tv) {
      if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) {
        throw InvalidInput("tet references vertex id out of range");
      }
    }
    double vol = signed_volume(vertices_[tv[0]], vertices_[tv[1]], vertices_[tv[2]], vertices_[tv[3]]);
    if (vol < 0) {
      std::swap(tv[2], tv[3]);
      vol = -vol;
    }
    double h = 0;
    for (const auto& le : kLocalEdges) h = std::max(h, (vertices_[tv[le[0]]] - vertices_[tv[le[1]]]).norm());
    if (!(vol > 1e-14 * h * h * h)) throw InvalidInput("degenerate tet with zero volume");
    volumes_[t] = vol;
    diameters_[t] = h;
  }

  topo_ = derive_entities(tets_, vertices_.size());

  const std::size_t nf = topo_.faces.size();
  face_tag_.assign(nf, -1);
  face_normals_.resize(nf);
  face_areas_.resize(nf);
  face_diameters_.resize(nf);
  edge_dirichlet_.assign(topo_.edges.size(), 0);
  edge_neumann_.assign(topo_.edges.size(), 0);

  for (std::size_t f = 0; f < nf; ++f) {
    const auto& fv = topo_.faces[f];
    const Vec3& a = vertices_[fv[0]];
    const Vec3& b = vertices_[fv[1]];
    const Vec3& c = vertices_[fv[2]];
    Vec3 n = (b - a).cross(c - a);
    face_areas_[f] = 0.5 * n.norm();
    n.normalize();
    const int t0 = topo_.face_tets[f][0];
    int opposite = -1;
    for (int v : tets_[t0]) {
      if (v != fv[0] && v != fv[1] && v != fv[2]) opposite = v;
    }
    const Vec3 centroid = (a + b + c) / 3.0;
    if (n.dot(centroid - vertices_[opposite]) < 0) n = -n;
    face_normals_[f] = n;
    face_diameters_[f] = std::max({(a - b).norm(), (b - c).norm(), (a - c).norm()});

    if (topo_.face_tets[f][1] < 0) {
      auto it = boundary_tags_.find(fv);
      if (it == boundary_tags_.end()) {
        throw InvalidInput("boundary face without a boundary tag (non-conforming mesh?)");
      }
      face_tag_[f] = static_cast<std::int8_t>(it->second);
      auto& flags = it->second == BoundaryTag::Dirichlet ? edge_dirichlet_ : edge_neumann_;
      const int t = topo_.face_tets[f][0];
      const int lf = local_face(t, static_cast<int>(f));
      for (int le = 0; le < 6; ++le) {
        const auto& e = kLocalEdges[le];
        if (e[0] != lf && e[1] != lf) flags[topo_.tet_edges[t][le]] = 1;
      }
    }
  }

  vertex_tet_offsets_.assign(vertices_.size() + 1, 0);
  for (const auto& tv : tets_) {
    for (int v : tv) ++vertex_tet_offsets_[v + 1];
  }
  std::partial_sum(vertex_tet_offsets_.begin(), vertex_tet_offsets_.end(), vertex_tet_offsets_.begin());
  vertex_tet_list_.resize(vertex_tet_offsets_.back());
  std::vector<int> fill(vertex_tet_offsets_.begin(), vertex_tet_offsets_.end() - 1);
  for (std::size_t t = 0; t < nt; ++t) {
    for (int v : tets_[t]) vertex_tet_list_[fill[v]++] = static_cast<int>(t);
  }
}

std::optional<BoundaryTag> TetMesh::face_tag(int f) const {
  if (face_tag_[f] < 0) return std::nullopt;
  return static_cast<BoundaryTag>(face_tag_[f]);
}

int TetMesh::local_vertex(int t, int v) const {
  for (int i = 0; i < 4; ++i) {
    if (tets_[t][i] == v) return i;
  }
  return -1;
}

int TetMesh::local_face(int t, int f) const {
  for (int i = 0; i < 4; ++i) {
    if (topo_.tet_faces[t][i] == f) return i;
  }
  return -1;
}

TetMesh build_box_mesh(const Box& box, std::array<int, 3> n, const SubdomainClassifier& classifier,
                       const BoundaryClassifier& bc_classifier) {
  for (int d = 0; d < 3; ++d) {
    if (n[d] < 1) throw InvalidInput("box mesh needs at least one subdivision per axis");
    if (!(box.hi[d] > box.lo[d])) throw InvalidInput("box extents must be increasing");
  }
  const Vec3 h((box.hi - box.lo).array() / Vec3(n[0], n[1], n[2]).array());
  auto vid = [&](int i, int j, int k) { return i + (n[0] + 1) * (j + (n[1] + 1) * k); };

  std::vector<Vec3> verts;
  verts.reserve((n[0] + 1) * (n[1] + 1) * (n[2] + 1));
  for (int k = 0; k <= n[2]; ++k) {
    for (int j = 0; j <= n[1]; ++j) {
      for (int i = 0; i <= n[0]; ++i) {
        verts.emplace_back(box.lo + Vec3(i * h[0], j * h[1], k * h[2]));
      }
    }
  }
  for (int d = 0; d < 3; ++d) {
    // snap the far face exactly onto the box
    for (auto& v : verts) {
      if (std::abs(v[d] - box.hi[d]) < 1e-12 * h[d]) v[d] = box.hi[d];
    }
  }

  static constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  std::vector<std::array<int, 4>> tets;
  std::vector<int> labels;
  std::vector<BisectionTag> tags;
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        const Vec3 lo = box.lo + Vec3(i * h[0], j * h[1], k * h[2]);
        const Vec3 centroid = lo + 0.5 * h;
        const int label = classifier(centroid);
        for (int c = 0; c < 8; ++c) {
          const Vec3 corner = lo + Vec3((c & 1) * h[0], ((c >> 1) & 1) * h[1], ((c >> 2) & 1) * h[2]);
          if (classifier(centroid + 0.9 * (corner - centroid)) != label) {
            throw InvalidInput("subdomain classifier is not constant on a grid cell; an interface would cut elements");
          }
        }
        for (const auto& p : kPerms) {
          std::array<int, 3> idx{i, j, k};
          std::array<int, 4> tv{};
          tv[0] = vid(idx[0], idx[1], idx[2]);
          for (int s = 0; s < 3; ++s) {
            ++idx[p[s]];
            tv[s + 1] = vid(idx[0], idx[1], idx[2]);
          }
          tets.push_back(tv);
          labels.push_back(label);
          tags.push_back({tv, 0});
        }
      }
    }
  }

  const MeshTopology topo = derive_entities(tets, verts.size());
  std::map<FaceKey, BoundaryTag> btags;
  for (std::size_t f = 0; f < topo.faces.size(); ++f) {
    if (topo.face_tets[f][1] >= 0) continue;
    const auto& fv = topo.faces[f];
    btags.emplace(fv, bc_classifier((verts[fv[0]] + verts[fv[1]] + verts[fv[2]]) / 3.0));
  }
  return TetMesh(std::move(verts), std::move(tets), std::move(labels), std::move(tags), std::move(btags));
}

namespace {

class Bisector {
 public:
  explicit Bisector(const TetMesh& mesh)
      : verts_(mesh.vertices().begin(), mesh.vertices().end()),
        labels_(mesh.labels().begin(), mesh.labels().end()),
        btags_(mesh.boundary_tags()) {
    for (std::size_t t = 0; t < mesh.num_tets(); ++t) tags_.push_back(mesh.bisection_tag(static_cast<int>(t)));
  }

  void split(int t) {
    const BisectionTag tag = tags_[t];
    const auto& x = tag.order;
    const int m = midpoint(x[0], x[3]);
    const int next = (tag.type + 1) % 3;

    // Children follow the tagged-simplex rule: the vertices x1..x_type keep
    // their order, the remaining interior vertices are reversed in the
    // second child.
    BisectionTag c0{{x[0], m, x[1], x[2]}, next};
    BisectionTag c1{{x[3], m, x[1], x[2]}, next};
    if (tag.type == 0) c1.order = {x[3], m, x[2], x[1]};

    for (int k : {1, 2}) {
      const auto it = btags_.find(make_face_key(x[0], x[3], x[k]));
      if (it == btags_.end()) continue;
      const BoundaryTag bt = it->second;
      btags_.erase(it);
      btags_.emplace(make_face_key(x[0], m, x[k]), bt);
      btags_.emplace(make_face_key(m, x[3], x[k]), bt);
    }

    tags_[t] = c0;
    tags_.push_back(c1);
    labels_.push_back(labels_[t]);
  }

  bool has_hanging_edge(int t) const {
    const auto& x = tags_[t].order;
    for (const auto& le : kLocalEdges) {
      if (midpoints_.count(make_edge_key(x[le[0]], x[le[1]]))) return true;
    }
    return false;
  }

  std::size_t num_tets() const { return tags_.size(); }

  TetMesh finish() && {
    std::vector<std::array<int, 4>> tets;
    tets.reserve(tags_.size());
    for (const auto& tg : tags_) tets.push_back(tg.order);
    return TetMesh(std::move(verts_), std::move(tets), std::move(labels_), std::move(tags_), std::move(btags_));
  }

 private:
  int midpoint(int a, int b) {
    const EdgeKey key = make_edge_key(a, b);
    auto it = midpoints_.find(key);
    if (it != midpoints_.end()) return it->second;
    const int id = static_cast<int>(verts_.size());
    verts_.push_back(0.5 * (verts_[a] + verts_[b]));
    midpoints_.emplace(key, id);
    return id;
  }

  std::vector<Vec3> verts_;
  std::vector<int> labels_;
  std::vector<BisectionTag> tags_;
  std::map<FaceKey, BoundaryTag> btags_;
  std::unordered_map<EdgeKey, int, EdgeKeyHash> midpoints_;
};

}  // namespace

TetMesh bisect(const TetMesh& mesh, std::span<const int> marked) {
  if (marked.empty()) return mesh;
  std::vector<int> work(marked.begin(), marked.end());
  std::sort(work.begin(), work.end());
  work.erase(std::unique(work.begin(), work.end()), work.end());
  for (int t : work) {
    if (t < 0 || static_cast<std::size_t>(t) >= mesh.num_tets()) throw InvalidInput("marked tet id out of range");
  }

  Bisector b(mesh);
  for (int round = 0; !work.empty(); ++round) {
    if (round > kMaxClosureRounds) {
      throw NumericalFailure("bisection closure did not terminate; refinement marks are inconsistent");
    }
    for (int t : work) b.split(t);
    work.clear();
    for (std::size_t t = 0; t < b.num_tets(); ++t) {
      if (b.has_hanging_edge(static_cast<int>(t))) work.push_back(static_cast<int>(t));
    }
  }
  return std::move(b).finish();
}

TetMesh bisect_all(const TetMesh& mesh) {
  std::vector<int> all(mesh.num_tets());
  std::iota(all.begin(), all.end(), 0);
  return bisect(mesh, all);
}

VertexPatch vertex_patch(const TetMesh& mesh, int z) {
  VertexPatch p;
  p.center = z;
  const auto tets = mesh.vertex_tets(z);
  p.tets.assign(tets.begin(), tets.end());
  for (int t : p.tets) {
    p.center_local.push_back(mesh.local_vertex(t, z));
    for (int lf = 0; lf < 4; ++lf) {
      const int f = mesh.tet_faces(t)[lf];
      const bool has_center = lf != p.center_local.back();
      if (const auto tag = mesh.face_tag(f)) {
        (*tag == BoundaryTag::Dirichlet ? p.dirichlet_faces : p.neumann_faces).push_back(f);
      } else if (has_center) {
        p.interior_faces.push_back(f);
      } else {
        p.inner_boundary_faces.push_back(f);
      }
    }
  }
  std::sort(p.interior_faces.begin(), p.interior_faces.end());
  p.interior_faces.erase(std::unique(p.interior_faces.begin(), p.interior_faces.end()), p.interior_faces.end());
  std::sort(p.dirichlet_faces.begin(), p.dirichlet_faces.end());
  std::sort(p.neumann_faces.begin(), p.neumann_faces.end());
  std::sort(p.inner_boundary_faces.begin(), p.inner_boundary_faces.end());
  return p;
}

std::array<double, 4> barycentric(const TetMesh& mesh, int t, const Vec3& x) {
  const auto& tv = mesh.tet(t);
  Mat3 J;
  for (int i = 0; i < 3; ++i) J.col(i) = mesh.vertex(tv[i + 1]) - mesh.vertex(tv[0]);
  const Vec3 xi = J.partialPivLu().solve(x - mesh.vertex(tv[0]));
  return {1.0 - xi.sum(), xi[0], xi[1], xi[2]};
}

double min_dihedral_angle(const TetMesh& mesh, int t) {
  const auto& tv = mesh.tet(t);
  std::array<Vec3, 4> outward;
  for (int lf = 0; lf < 4; ++lf) {
    const auto& fv = kLocalFaces[lf];
    const Vec3& a = mesh.vertex(tv[fv[0]]);
    Vec3 n = (mesh.vertex(tv[fv[1]]) - a).cross(mesh.vertex(tv[fv[2]]) - a).normalized();
    if (n.dot(a - mesh.vertex(tv[lf])) < 0) n = -n;
    outward[lf] = n;
  }
  double best = M_PI;
  for (const auto& le : kLocalEdges) {
    // the two faces containing edge (i, j) are opposite the other two vertices
    std::array<int, 2> others{};
    int k = 0;
    for (int v = 0; v < 4; ++v) {
      if (v != le[0] && v != le[1]) others[k++] = v;
    }
    const double c = std::clamp(-outward[others[0]].dot(outward[others[1]]), -1.0, 1.0);
    best = std::min(best, std::acos(c));
  }
  return best;
}

}  // namespace hcurlest
