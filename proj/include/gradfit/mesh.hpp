#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gradfit/geometry.hpp"

namespace gradfit {

// Undirected edge identified by its sorted vertex pair.
struct FaceKey {
  int lo = -1;
  int hi = -1;

  FaceKey() = default;
  FaceKey(int a, int b) : lo(a < b ? a : b), hi(a < b ? b : a) {}

  bool operator==(const FaceKey&) const = default;
  auto operator<=>(const FaceKey&) const = default;  // (lo, hi) lexicographic
};

struct FaceKeyHash {
  size_t operator()(FaceKey k) const {
    return std::hash<uint64_t>()((static_cast<uint64_t>(k.lo) << 32) ^
                                 static_cast<uint64_t>(static_cast<uint32_t>(k.hi)));
  }
};

// v[2] is the newest vertex; the refinement edge is (v[0], v[1]).
struct Element {
  std::array<int, 3> v{-1, -1, -1};
  int generation = 0;
  bool active = true;
  int parent = -1;
  std::array<int, 2> children{-1, -1};
};

struct ShapeMetrics {
  double h = 0.0;      // diameter (longest edge)
  double rho = 0.0;    // incircle diameter
  double sigma = 0.0;  // h / rho
};

struct CompletionStats {
  int bisections = 0;
};

class Mesh {
 public:
  Mesh() = default;  // empty; fill through the factories

  // Assigns refinement edges by the longest-edge rule, ties broken by the
  // smallest opposite-vertex index. Rejects degenerate and non-conforming
  // input.
  static Mesh from_arrays(const std::vector<Vec2>& coords,
                          const std::vector<std::array<int, 3>>& triangles);

  // Same validation but refinement edges are taken from the caller
  // (opposite[i] = local index in triangles[i] of the vertex opposite the
  // refinement edge). Used by the file reader.
  static Mesh from_arrays_with_edges(const std::vector<Vec2>& coords,
                                     const std::vector<std::array<int, 3>>& triangles,
                                     const std::vector<int>& opposite);

  // Splits the refinement edge at its midpoint (vertex deduplicated through
  // a global edge map) and creates the two newest-vertex children.
  std::pair<int, int> bisect(int element_id);

  // Iterative hanging-node closure; afterwards is_conforming() is true.
  CompletionStats complete();

  bool is_conforming() const;

  // Active elements whose closure contains the point.
  std::vector<int> star(Vec2 z) const;
  std::vector<int> star(int vertex_id) const;

  // Active elements touching the given element (including itself).
  std::vector<int> patch(int element_id) const;

  // Connectivity of the star of z through shared full edges containing z.
  bool is_star_face_connected(Vec2 z) const;

  ShapeMetrics shape_metrics(int element_id) const;
  double max_shape_coefficient() const;

  int initial_count() const { return initial_count_; }
  size_t vertex_count() const { return vertices_.size(); }
  size_t element_count() const { return elements_.size(); }
  int active_count() const { return active_count_; }
  std::vector<int> active_elements() const;

  Vec2 vertex(int id) const { return vertices_[static_cast<size_t>(id)]; }
  const Element& element(int id) const { return elements_[static_cast<size_t>(id)]; }
  Tri triangle(int id) const {
    const auto& e = elements_[static_cast<size_t>(id)];
    return Tri{{vertex(e.v[0]), vertex(e.v[1]), vertex(e.v[2])}};
  }

  double total_area() const;
  int max_generation() const;

  // Active elements adjacent to an edge; {-1,-1} if none.
  std::array<int, 2> edge_elements(FaceKey k) const;
  bool is_boundary_edge(FaceKey k) const;
  std::optional<int> midpoint_of(FaceKey k) const;
  const std::unordered_map<FaceKey, std::array<int, 2>, FaceKeyHash>& edge_adjacency() const {
    return edge_elems_;
  }

  // Journal of bisections for speculative refinement: everything done after
  // mark_journal() can be undone with rollback_journal().
  size_t mark_journal();
  void rollback_journal(size_t mark);

 private:
  void insert_initial(const std::vector<Vec2>& coords,
                      const std::vector<std::array<int, 3>>& tris,
                      const std::vector<int>& opposite);
  void validate_conforming_geometrically() const;
  void adjacency_add(int elem_id);
  void adjacency_remove(int elem_id);
  bool has_hanging_edge(int elem_id) const;

  std::vector<Vec2> vertices_;
  std::vector<Element> elements_;
  std::unordered_map<FaceKey, int, FaceKeyHash> midpoint_;
  std::unordered_map<FaceKey, std::array<int, 2>, FaceKeyHash> edge_elems_;
  int initial_count_ = 0;
  int active_count_ = 0;

  struct BisectRecord {
    int parent;
    bool midpoint_created;
  };
  std::vector<BisectRecord> journal_;
};

// One sweep of "bisect every active element, then complete".
void uniform_refine(Mesh& mesh);

// Builtin initial meshes used by the experiments.
Mesh unit_square_mesh();
Mesh l_shape_mesh();

}  // namespace gradfit
