#include "gradfit/fespace.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "gradfit/errors.hpp"

namespace gradfit {

std::string to_string(BC bc) { return bc == BC::dirichlet0 ? "dirichlet0" : "neumann"; }

BC bc_from_string(const std::string& s) {
  if (s == "dirichlet0") return BC::dirichlet0;
  if (s == "neumann") return BC::neumann;
  throw ConfigError("unknown boundary condition: " + s);
}

FeSpace::FeSpace(const Mesh& mesh, int degree, BC bc)
    : mesh_(&mesh), degree_(degree), bc_(bc) {
  if (degree < 1 || degree > 4) throw ConfigError("FeSpace: degree must be in 1..4");
  if (!mesh.is_conforming()) throw ConfigError("FeSpace: mesh is not conforming");

  actives_ = mesh.active_elements();
  for (size_t i = 0; i < actives_.size(); ++i)
    active_index_.emplace(actives_[i], static_cast<int>(i));

  // ordered entity tables keep the numbering deterministic
  std::set<int> vertex_ids;
  std::set<FaceKey> edges;
  std::map<int, std::array<int, 2>> vertex_star_count;  // vid -> {count, boundary}
  for (int id : actives_) {
    const auto& e = mesh.element(id);
    for (int i = 0; i < 3; ++i) {
      vertex_ids.insert(e.v[static_cast<size_t>(i)]);
      edges.insert(FaceKey(e.v[static_cast<size_t>(i)], e.v[static_cast<size_t>((i + 1) % 3)]));
    }
  }
  std::set<int> boundary_vertices;
  std::set<FaceKey> boundary_edges;
  for (const FaceKey& k : edges)
    if (mesh.is_boundary_edge(k)) {
      boundary_edges.insert(k);
      boundary_vertices.insert(k.lo);
      boundary_vertices.insert(k.hi);
    }
  std::map<int, std::vector<int>> vstar;  // vid -> active elements
  for (int id : actives_)
    for (int v : mesh.element(id).v) vstar[v].push_back(id);
  std::map<FaceKey, std::vector<int>> estar;
  for (int id : actives_) {
    const auto& e = mesh.element(id);
    for (int i = 0; i < 3; ++i)
      estar[FaceKey(e.v[static_cast<size_t>(i)], e.v[static_cast<size_t>((i + 1) % 3)])].push_back(id);
  }

  // vertex nodes, then edge nodes, then element-interior nodes
  std::map<int, int> vertex_node;
  std::map<std::pair<FaceKey, int>, int> edge_node;  // (edge, offset 1..deg-1)

  const auto sz_face_for_vertex = [&](int vid, bool on_bdry) {
    FaceKey best;
    bool found = false;
    for (const auto& [key, elems] : estar) {
      (void)elems;
      if (key.lo != vid && key.hi != vid) continue;
      if (on_bdry && !boundary_edges.count(key)) continue;
      if (!found || key < best) {
        best = key;
        found = true;
      }
    }
    if (!found) throw ConfigError("FeSpace: no admissible face for a boundary node");
    return best;
  };

  for (int vid : vertex_ids) {
    GlobalNode n;
    n.xy = mesh.vertex(vid);
    n.owner = vstar.at(vid).front();
    n.star_count = static_cast<int>(vstar.at(vid).size());
    n.on_boundary = boundary_vertices.count(vid) > 0;
    n.constrained =
        !(n.star_count == 1 && (bc_ == BC::neumann || !n.on_boundary));
    const auto& ev = mesh.element(n.owner).v;
    for (int i = 0; i < 3; ++i)
      n.alpha[static_cast<size_t>(i)] = ev[static_cast<size_t>(i)] == vid ? degree : 0;
    if (n.constrained) {
      n.sz_face = sz_face_for_vertex(vid, n.on_boundary);
      n.sz_index = n.sz_face.lo == vid ? 0 : degree;
    }
    vertex_node.emplace(vid, static_cast<int>(nodes_.size()));
    nodes_.push_back(n);
  }

  if (degree >= 2) {
    for (const FaceKey& k : edges) {
      const auto& elems = estar.at(k);
      const bool bdry = boundary_edges.count(k) > 0;
      for (int off = 1; off < degree; ++off) {
        GlobalNode n;
        n.xy = node_point({k.lo, k.hi, 0}, {mesh.vertex(k.lo), mesh.vertex(k.hi), Vec2{}},
                          {degree - off, off, 0}, degree);
        n.owner = elems.front();
        n.star_count = static_cast<int>(elems.size());
        n.on_boundary = bdry;
        n.constrained =
            !(n.star_count == 1 && (bc_ == BC::neumann || !n.on_boundary));
        const auto& ev = mesh.element(n.owner).v;
        for (int i = 0; i < 3; ++i) {
          const int vid = ev[static_cast<size_t>(i)];
          n.alpha[static_cast<size_t>(i)] = vid == k.lo ? degree - off : (vid == k.hi ? off : 0);
        }
        n.sz_face = k;
        n.sz_index = off;
        edge_node.emplace(std::make_pair(k, off), static_cast<int>(nodes_.size()));
        nodes_.push_back(n);
      }
    }
  }

  elem_nodes_.resize(actives_.size());
  const auto alphas = tri_multi_indices(degree);
  for (size_t ai = 0; ai < actives_.size(); ++ai) {
    const int id = actives_[ai];
    const auto& ev = mesh.element(id).v;
    auto& locals = elem_nodes_[ai];
    locals.reserve(alphas.size());
    const std::array<Vec2, 3> coords{mesh.vertex(ev[0]), mesh.vertex(ev[1]), mesh.vertex(ev[2])};
    for (const auto& a : alphas) {
      int zeros = 0;
      for (int c : a)
        if (c == 0) ++zeros;
      if (zeros == 2) {
        for (int i = 0; i < 3; ++i)
          if (a[static_cast<size_t>(i)] == degree) locals.push_back(vertex_node.at(ev[static_cast<size_t>(i)]));
      } else if (zeros == 1) {
        int i = -1, j = -1;
        for (int c = 0; c < 3; ++c)
          if (a[static_cast<size_t>(c)] != 0) (i < 0 ? i : j) = c;
        const int vi = ev[static_cast<size_t>(i)], vj = ev[static_cast<size_t>(j)];
        const FaceKey k(vi, vj);
        const int off = k.hi == vi ? a[static_cast<size_t>(i)] : a[static_cast<size_t>(j)];
        locals.push_back(edge_node.at(std::make_pair(k, off)));
      } else {
        GlobalNode n;
        n.xy = node_point(ev, coords, a, degree);
        n.alpha = a;
        n.owner = id;
        n.star_count = 1;
        n.on_boundary = false;
        n.constrained = false;
        locals.push_back(static_cast<int>(nodes_.size()));
        nodes_.push_back(n);
      }
    }
  }

  for (auto& n : nodes_) {
    const bool fixed = bc_ == BC::dirichlet0 && n.on_boundary;
    n.dof = fixed ? -1 : dof_count_++;
  }
}

const std::vector<int>& FeSpace::element_nodes(int element_id) const {
  const auto it = active_index_.find(element_id);
  if (it == active_index_.end()) throw ConfigError("FeSpace: not an active element");
  return elem_nodes_[static_cast<size_t>(it->second)];
}

std::vector<char> FeSpace::constrained_flags(int element_id) const {
  const auto& locals = element_nodes(element_id);
  std::vector<char> out(locals.size());
  for (size_t i = 0; i < locals.size(); ++i)
    out[i] = nodes_[static_cast<size_t>(locals[i])].constrained ? 1 : 0;
  return out;
}

}  // namespace gradfit
