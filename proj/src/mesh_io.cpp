#include "gradfit/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "gradfit/errors.hpp"

namespace gradfit {

namespace {

std::string g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto actives = mesh.active_elements();
  // compact vertex numbering over active elements
  std::unordered_map<int, int> remap;
  std::vector<int> verts;
  for (int id : actives)
    for (int v : mesh.element(id).v)
      if (remap.emplace(v, static_cast<int>(verts.size())).second) verts.push_back(v);

  os << "gradfit-mesh v1 dim=2\n";
  os << "vertices " << verts.size() << "\n";
  for (int v : verts) {
    const Vec2 p = mesh.vertex(v);
    os << g17(p.x) << " " << g17(p.y) << "\n";
  }
  os << "elements " << actives.size() << "\n";
  for (int id : actives) {
    const auto& e = mesh.element(id);
    os << remap.at(e.v[0]) << " " << remap.at(e.v[1]) << " " << remap.at(e.v[2]) << " 2\n";
  }
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open mesh file for writing: " + path);
  write_mesh(os, mesh);
}

Mesh read_mesh(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("gradfit-mesh v1 dim=2", 0) != 0)
    throw ConfigError("mesh file: bad header");
  std::string word;
  size_t n = 0;
  if (!(is >> word >> n) || word != "vertices")
    throw ConfigError("mesh file: expected 'vertices N'");
  std::vector<Vec2> coords(n);
  for (auto& p : coords)
    if (!(is >> p.x >> p.y)) throw ConfigError("mesh file: bad vertex line");
  size_t m = 0;
  if (!(is >> word >> m) || word != "elements")
    throw ConfigError("mesh file: expected 'elements M'");
  std::vector<std::array<int, 3>> tris(m);
  std::vector<int> opp(m);
  for (size_t t = 0; t < m; ++t)
    if (!(is >> tris[t][0] >> tris[t][1] >> tris[t][2] >> opp[t]))
      throw ConfigError("mesh file: bad element line");
  return Mesh::from_arrays_with_edges(coords, tris, opp);
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open mesh file: " + path);
  return read_mesh(is);
}

}  // namespace gradfit
