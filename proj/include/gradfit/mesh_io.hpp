#pragma once

#include <iosfwd>
#include <string>

#include "gradfit/mesh.hpp"

namespace gradfit {

// Text format:
//   gradfit-mesh v1 dim=2
//   vertices N
//   x y               (N lines, 17 significant digits)
//   elements M
//   i j k r           (M lines; r = local index of the vertex opposite the
//                      refinement edge)
// Only active elements are written.
void write_mesh(std::ostream& os, const Mesh& mesh);
void write_mesh_file(const std::string& path, const Mesh& mesh);

Mesh read_mesh(std::istream& is);
Mesh read_mesh_file(const std::string& path);

}  // namespace gradfit
