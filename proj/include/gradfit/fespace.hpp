#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "gradfit/basis.hpp"
#include "gradfit/mesh.hpp"

namespace gradfit {

enum class BC { dirichlet0, neumann };

std::string to_string(BC bc);
BC bc_from_string(const std::string& s);

struct GlobalNode {
  Vec2 xy;
  std::array<int, 3> alpha{0, 0, 0};  // local multi-index in the owner element
  int owner = -1;                     // an active element containing the node
  int star_count = 0;
  bool on_boundary = false;
  bool constrained = true;
  FaceKey sz_face;       // F_z; valid for constrained nodes
  int sz_index = -1;     // node position along sz_face (lo -> hi)
  int dof = -1;          // -1 for nodes fixed by the boundary condition
};

// Continuous degree-l Lagrange space on a conforming mesh. Nodes shared by
// several elements are identified structurally (vertex / edge+offset /
// element interior), so the nodal numbering is independent of round-off.
class FeSpace {
 public:
  FeSpace(const Mesh& mesh, int degree, BC bc);

  const Mesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  BC bc() const { return bc_; }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int dof_count() const { return dof_count_; }
  const GlobalNode& node(int i) const { return nodes_[static_cast<size_t>(i)]; }

  const std::vector<int>& active_elements() const { return actives_; }
  // global node indices of an element, aligned with the canonical local
  // Lagrange node order
  const std::vector<int>& element_nodes(int element_id) const;
  // constrained flags in local node order (input to the decoupling bound)
  std::vector<char> constrained_flags(int element_id) const;

 private:
  const Mesh* mesh_;
  int degree_;
  BC bc_;
  std::vector<GlobalNode> nodes_;
  std::vector<int> actives_;
  std::unordered_map<int, int> active_index_;
  std::vector<std::vector<int>> elem_nodes_;
  int dof_count_ = 0;
};

}  // namespace gradfit
