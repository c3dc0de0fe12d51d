#pragma once

#include "hcurlest/core.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace hcurlest {

enum class BoundaryTag : std::uint8_t { Dirichlet, Neumann };

using EdgeKey = std::array<int, 2>;  // sorted vertex ids
using FaceKey = std::array<int, 3>;  // sorted vertex ids

inline EdgeKey make_edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }
FaceKey make_face_key(int a, int b, int c);

/// Local edge (i, j) of a tetrahedron, i < j in local numbering.
inline constexpr std::array<std::array<int, 2>, 6> kLocalEdges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Local face i is opposite local vertex i.
inline constexpr std::array<std::array<int, 3>, 4> kLocalFaces{
    {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

/// Index into kLocalEdges of the local edge joining local vertices a and b.
int local_edge_index(int a, int b);

/// Vertex ordering plus type for marked-edge bisection. The refinement edge
/// joins order[0] and order[3].
struct BisectionTag {
  std::array<int, 4> order{};
  int type = 0;
};

/// Edge and face tables derived from a tetrahedral connectivity.
struct MeshTopology {
  std::vector<EdgeKey> edges;
  std::vector<FaceKey> faces;
  std::vector<std::array<int, 6>> tet_edges;
  /// +1 when local edge (i, j) of kLocalEdges runs from the lower to the
  /// higher global vertex id, -1 otherwise.
  std::vector<std::array<std::int8_t, 6>> tet_edge_signs;
  std::vector<std::array<int, 4>> tet_faces;
  /// Adjacent tets of each face, lower tet id first; -1 marks a boundary face.
  std::vector<std::array<int, 2>> face_tets;
};

/// Builds unique global edges/faces and tet incidence. Throws InvalidInput
/// on a face shared by more than two tets.
MeshTopology derive_entities(std::span<const std::array<int, 4>> tets, std::size_t num_vertices);

struct Box {
  Vec3 lo;
  Vec3 hi;
};

/// Conforming tetrahedral mesh with subdomain labels, boundary tags and
/// bisection state. Immutable once constructed.
class TetMesh {
 public:
  TetMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets, std::vector<int> labels,
          std::vector<BisectionTag> bisection, std::map<FaceKey, BoundaryTag> boundary_tags);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_tets() const { return tets_.size(); }
  std::size_t num_edges() const { return topo_.edges.size(); }
  std::size_t num_faces() const { return topo_.faces.size(); }

  const Vec3& vertex(int v) const { return vertices_[v]; }
  std::span<const Vec3> vertices() const { return vertices_; }
  const std::array<int, 4>& tet(int t) const { return tets_[t]; }
  std::span<const std::array<int, 4>> tets() const { return tets_; }
  int label(int t) const { return labels_[t]; }
  std::span<const int> labels() const { return labels_; }
  const BisectionTag& bisection_tag(int t) const { return bisection_[t]; }
  const std::map<FaceKey, BoundaryTag>& boundary_tags() const { return boundary_tags_; }

  const EdgeKey& edge(int e) const { return topo_.edges[e]; }
  const FaceKey& face(int f) const { return topo_.faces[f]; }
  const std::array<int, 6>& tet_edges(int t) const { return topo_.tet_edges[t]; }
  const std::array<std::int8_t, 6>& tet_edge_signs(int t) const { return topo_.tet_edge_signs[t]; }
  const std::array<int, 4>& tet_faces(int t) const { return topo_.tet_faces[t]; }
  const std::array<int, 2>& face_tets(int f) const { return topo_.face_tets[f]; }
  bool is_boundary_face(int f) const { return topo_.face_tets[f][1] < 0; }
  std::optional<BoundaryTag> face_tag(int f) const;

  /// Unit normal fixed per face: for interior faces it points out of the
  /// lower-indexed adjacent tet, for boundary faces out of the domain.
  const Vec3& face_normal(int f) const { return face_normals_[f]; }
  double face_area(int f) const { return face_areas_[f]; }
  double face_diameter(int f) const { return face_diameters_[f]; }
  double volume(int t) const { return volumes_[t]; }
  double diameter(int t) const { return diameters_[t]; }
  Vec3 edge_vector(int e) const { return vertices_[edge(e)[1]] - vertices_[edge(e)[0]]; }

  bool edge_on_dirichlet(int e) const { return edge_dirichlet_[e] != 0; }
  bool edge_on_neumann(int e) const { return edge_neumann_[e] != 0; }

  /// Tets containing vertex v.
  std::span<const int> vertex_tets(int v) const {
    return {vertex_tet_list_.data() + vertex_tet_offsets_[v],
            vertex_tet_list_.data() + vertex_tet_offsets_[v + 1]};
  }

  /// Position of global vertex v inside tet t, or -1.
  int local_vertex(int t, int v) const;

  /// Local index (0..3) of the face f inside tet t, or -1.
  int local_face(int t, int f) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 4>> tets_;
  std::vector<int> labels_;
  std::vector<BisectionTag> bisection_;
  std::map<FaceKey, BoundaryTag> boundary_tags_;

  MeshTopology topo_;
  std::vector<std::int8_t> face_tag_;  // -1 interior, else BoundaryTag
  std::vector<Vec3> face_normals_;
  std::vector<double> face_areas_;
  std::vector<double> face_diameters_;
  std::vector<double> volumes_;
  std::vector<double> diameters_;
  std::vector<std::uint8_t> edge_dirichlet_;
  std::vector<std::uint8_t> edge_neumann_;
  std::vector<int> vertex_tet_offsets_;
  std::vector<int> vertex_tet_list_;
};

using SubdomainClassifier = std::function<int(const Vec3&)>;
using BoundaryClassifier = std::function<BoundaryTag(const Vec3&)>;

/// Kuhn triangulation of an axis-aligned box: every grid cell is split into
/// six tets sharing the cell diagonal. Labels come from `classifier` at the
/// cell centroid; a classifier that is not constant on a cell is rejected.
TetMesh build_box_mesh(const Box& box, std::array<int, 3> n, const SubdomainClassifier& classifier,
                       const BoundaryClassifier& bc_classifier);

/// Marked-edge bisection of the marked tets followed by the conforming
/// closure. Children inherit labels; split boundary faces inherit tags.
TetMesh bisect(const TetMesh& mesh, std::span<const int> marked);

/// Bisects every tet once.
TetMesh bisect_all(const TetMesh& mesh);

struct VertexPatch {
  int center = -1;
  std::vector<int> tets;
  /// Position of the center inside each member tet.
  std::vector<int> center_local;
  /// Faces containing the center shared by two member tets.
  std::vector<int> interior_faces;
  /// Faces of member tets on the patch boundary that are interior to the
  /// domain (the opposite faces touching tets outside the patch).
  std::vector<int> inner_boundary_faces;
  /// Faces of member tets lying on the domain boundary, by tag.
  std::vector<int> dirichlet_faces;
  std::vector<int> neumann_faces;
};

VertexPatch vertex_patch(const TetMesh& mesh, int z);

/// Barycentric coordinates of x with respect to tet t.
std::array<double, 4> barycentric(const TetMesh& mesh, int t, const Vec3& x);

/// Smallest dihedral angle of tet t in radians.
double min_dihedral_angle(const TetMesh& mesh, int t);

/// Signed volume of the tet spanned by four points.
double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

}  // namespace hcurlest
