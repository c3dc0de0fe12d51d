#pragma once

#include "hcurlest/mesh.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hcurlest {

struct CellArray {
  std::string name;
  std::vector<double> values;
  /// Written as a VTK int array.
  bool integer = false;
};

/// Legacy ASCII unstructured grid (points, tets as VTK_TETRA, cell data in
/// the given order). Throws InvalidInput on array length mismatch or a name
/// containing whitespace, std::runtime_error when the file cannot be written.
void export_vtk(const TetMesh& mesh, std::span<const CellArray> arrays, const std::filesystem::path& path);

/// "subdomain" array built from the mesh labels.
CellArray subdomain_array(const TetMesh& mesh);

}  // namespace hcurlest
