#include "hcurlest/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hcurlest {

CellArray subdomain_array(const TetMesh& mesh) {
  CellArray a{"subdomain", {}, true};
  a.values.assign(mesh.labels().begin(), mesh.labels().end());
  return a;
}

void export_vtk(const TetMesh& mesh, std::span<const CellArray> arrays, const std::filesystem::path& path) {
  for (const auto& a : arrays) {
    if (a.values.size() != mesh.num_tets()) {
      throw InvalidInput("cell array '" + a.name + "' has " + std::to_string(a.values.size()) + " values for " +
                         std::to_string(mesh.num_tets()) + " cells");
    }
    if (a.name.empty() || a.name.find_first_of(" \t\n") != std::string::npos) {
      throw InvalidInput("cell array name must be a non-empty word");
    }
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  char buf[96];
  out << "# vtk DataFile Version 3.0\nhcurlest mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
    out << buf;
  }
  out << "CELLS " << mesh.num_tets() << ' ' << 5 * mesh.num_tets() << '\n';
  for (const auto& t : mesh.tets()) out << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  out << "CELL_TYPES " << mesh.num_tets() << '\n';
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) out << "10\n";
  if (!arrays.empty()) {
    out << "CELL_DATA " << mesh.num_tets() << '\n';
    for (const auto& a : arrays) {
      out << "SCALARS " << a.name << (a.integer ? " int" : " double") << " 1\nLOOKUP_TABLE default\n";
      for (double v : a.values) {
        if (a.integer) {
          out << static_cast<long long>(v) << '\n';
        } else {
          std::snprintf(buf, sizeof buf, "%.17g\n", v);
          out << buf;
        }
      }
    }
  }
  out.flush();
  if (!out) throw std::runtime_error("failed while writing '" + path.string() + "'");
}

}  // namespace hcurlest
