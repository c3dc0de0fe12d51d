#pragma once

#include "hcurlest/fem.hpp"
#include "hcurlest/mesh.hpp"
#include "hcurlest/problems.hpp"

#include <random>

namespace fixtures {

using namespace hcurlest;

inline TetMesh unit_cube(int n = 1, BoundaryTag tag = BoundaryTag::Dirichlet) {
  return build_box_mesh({Vec3::Zero(), Vec3::Ones()}, {n, n, n}, [](const Vec3&) { return 0; },
                        [tag](const Vec3&) { return tag; });
}

// Tags every boundary face of an explicit connectivity.
inline std::map<FaceKey, BoundaryTag> tag_boundary(const std::vector<std::array<int, 4>>& tets, std::size_t nv,
                                                   BoundaryTag tag = BoundaryTag::Dirichlet) {
  const MeshTopology topo = derive_entities(tets, nv);
  std::map<FaceKey, BoundaryTag> tags;
  for (std::size_t f = 0; f < topo.faces.size(); ++f) {
    if (topo.face_tets[f][1] < 0) tags[topo.faces[f]] = tag;
  }
  return tags;
}

inline TetMesh mesh_from(std::vector<Vec3> x, std::vector<std::array<int, 4>> tets, std::vector<int> labels) {
  std::vector<BisectionTag> bt(tets.size());
  for (std::size_t t = 0; t < tets.size(); ++t) bt[t].order = tets[t];
  auto tags = tag_boundary(tets, x.size());
  return TetMesh(std::move(x), std::move(tets), std::move(labels), std::move(bt), std::move(tags));
}

inline TetMesh single_tet() {
  return mesh_from({{0.1, 0.0, 0.0}, {1.2, 0.2, 0.1}, {0.3, 0.9, -0.1}, {0.2, 0.3, 1.1}}, {{0, 1, 2, 3}}, {0});
}

// Two tets glued along the face (1, 2, 3), labels 0 and 1.
inline TetMesh two_tets() {
  return mesh_from({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}}, {{0, 1, 2, 3}, {4, 3, 2, 1}}, {0, 1});
}

inline std::array<Vec3, 4> random_tet(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  std::array<Vec3, 4> x{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  for (auto& p : x) p += Vec3(d(rng), d(rng), d(rng));
  if (signed_volume(x[0], x[1], x[2], x[3]) < 0) std::swap(x[2], x[3]);
  return x;
}

inline Vec3 centroid(const TetMesh& m, int t) {
  Vec3 c = Vec3::Zero();
  for (int v : m.tet(t)) c += m.vertex(v) / 4.0;
  return c;
}

inline Vec3 face_centroid(const TetMesh& m, int f) {
  Vec3 c = Vec3::Zero();
  for (int v : m.face(f)) c += m.vertex(v) / 3.0;
  return c;
}

}  // namespace fixtures
