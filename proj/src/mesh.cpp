#include "gradfit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "gradfit/errors.hpp"

namespace gradfit {

namespace {

constexpr double kGeomRelTol = 1e-12;

}  // namespace

void Mesh::adjacency_add(int elem_id) {
  const auto& e = elements_[static_cast<size_t>(elem_id)];
  for (int i = 0; i < 3; ++i) {
    const FaceKey k(e.v[static_cast<size_t>(i)], e.v[static_cast<size_t>((i + 1) % 3)]);
    auto& slot = edge_elems_.try_emplace(k, std::array<int, 2>{-1, -1}).first->second;
    if (slot[0] < 0)
      slot[0] = elem_id;
    else if (slot[1] < 0)
      slot[1] = elem_id;
    else
      throw ConfigError("mesh: edge shared by more than two elements");
  }
}

void Mesh::adjacency_remove(int elem_id) {
  const auto& e = elements_[static_cast<size_t>(elem_id)];
  for (int i = 0; i < 3; ++i) {
    const FaceKey k(e.v[static_cast<size_t>(i)], e.v[static_cast<size_t>((i + 1) % 3)]);
    auto it = edge_elems_.find(k);
    if (it == edge_elems_.end()) continue;
    auto& slot = it->second;
    if (slot[0] == elem_id) slot[0] = slot[1];
    if (slot[1] == elem_id || slot[0] == slot[1]) slot[1] = -1;
    if (slot[0] == elem_id) slot[0] = -1;
    if (slot[0] < 0 && slot[1] < 0) edge_elems_.erase(it);
  }
}

void Mesh::insert_initial(const std::vector<Vec2>& coords,
                          const std::vector<std::array<int, 3>>& tris,
                          const std::vector<int>& opposite) {
  if (tris.empty()) throw ConfigError("mesh: no elements");
  vertices_ = coords;
  const int n_vertices = static_cast<int>(coords.size());
  elements_.reserve(tris.size());
  for (size_t t = 0; t < tris.size(); ++t) {
    std::array<int, 3> tv = tris[t];
    for (int id : tv)
      if (id < 0 || id >= n_vertices)
        throw ConfigError("mesh: vertex index out of range");
    if (tv[0] == tv[1] || tv[1] == tv[2] || tv[0] == tv[2])
      throw ConfigError("mesh: repeated vertex in element");
    int opp = opposite[t];
    Tri g{{coords[static_cast<size_t>(tv[0])], coords[static_cast<size_t>(tv[1])],
           coords[static_cast<size_t>(tv[2])]}};
    const double area = g.signed_area();
    const double scale = g.diameter() * g.diameter();
    if (std::abs(area) <= kGeomRelTol * scale)
      throw ConfigError("mesh: degenerate element (zero area)");
    if (area < 0) {
      // flip to positive orientation, keeping track of the opposite vertex
      std::swap(tv[1], tv[2]);
      if (opp == 1)
        opp = 2;
      else if (opp == 2)
        opp = 1;
    }
    // rotate so the vertex opposite the refinement edge sits in slot 2
    std::array<int, 3> stored;
    if (opp == 0)
      stored = {tv[1], tv[2], tv[0]};
    else if (opp == 1)
      stored = {tv[2], tv[0], tv[1]};
    else
      stored = {tv[0], tv[1], tv[2]};
    Element e;
    e.v = stored;
    elements_.push_back(e);
  }
  initial_count_ = static_cast<int>(elements_.size());
  active_count_ = initial_count_;
  for (int i = 0; i < initial_count_; ++i) adjacency_add(i);
  validate_conforming_geometrically();
}

void Mesh::validate_conforming_geometrically() const {
  // brute-force hanging-vertex scan over the input
  std::vector<char> used(vertices_.size(), 0);
  for (const auto& e : elements_)
    if (e.active)
      for (int id : e.v) used[static_cast<size_t>(id)] = 1;
  for (const auto& e : elements_) {
    if (!e.active) continue;
    for (int i = 0; i < 3; ++i) {
      const int a = e.v[static_cast<size_t>(i)];
      const int b = e.v[static_cast<size_t>((i + 1) % 3)];
      for (size_t w = 0; w < vertices_.size(); ++w) {
        if (!used[w] || static_cast<int>(w) == a || static_cast<int>(w) == b) continue;
        if (strictly_inside_segment(vertices_[w], vertex(a), vertex(b), kGeomRelTol))
          throw ConfigError("mesh: non-conforming input (hanging vertex detected)");
      }
    }
  }
}

Mesh Mesh::from_arrays(const std::vector<Vec2>& coords,
                       const std::vector<std::array<int, 3>>& triangles) {
  std::vector<int> opposite(triangles.size(), 2);
  for (size_t t = 0; t < triangles.size(); ++t) {
    const auto& tv = triangles[t];
    const Tri g{{coords.at(static_cast<size_t>(tv[0])), coords.at(static_cast<size_t>(tv[1])),
                 coords.at(static_cast<size_t>(tv[2]))}};
    // edge i is opposite vertex i
    std::array<double, 3> len{dist(g[1], g[2]), dist(g[2], g[0]), dist(g[0], g[1])};
    const double tol = kGeomRelTol * g.diameter();
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (len[static_cast<size_t>(i)] > len[static_cast<size_t>(best)] + tol) {
        best = i;
      } else if (std::abs(len[static_cast<size_t>(i)] - len[static_cast<size_t>(best)]) <= tol &&
                 tv[static_cast<size_t>(i)] < tv[static_cast<size_t>(best)]) {
        best = i;
      }
    }
    opposite[t] = best;
  }
  return from_arrays_with_edges(coords, triangles, opposite);
}

Mesh Mesh::from_arrays_with_edges(const std::vector<Vec2>& coords,
                                  const std::vector<std::array<int, 3>>& triangles,
                                  const std::vector<int>& opposite) {
  if (opposite.size() != triangles.size())
    throw ConfigError("mesh: refinement-edge list size mismatch");
  for (int o : opposite)
    if (o < 0 || o > 2) throw ConfigError("mesh: refinement-edge index out of range");
  Mesh m;
  m.insert_initial(coords, triangles, opposite);
  return m;
}

std::pair<int, int> Mesh::bisect(int element_id) {
  Element& parent = elements_.at(static_cast<size_t>(element_id));
  if (!parent.active) throw ConfigError("bisect: inactive element");

  const int a = parent.v[0];
  const int b = parent.v[1];
  const int c = parent.v[2];
  const FaceKey edge(a, b);

  bool created = false;
  int mid;
  if (auto it = midpoint_.find(edge); it != midpoint_.end()) {
    mid = it->second;
  } else {
    const int lo = edge.lo, hi = edge.hi;
    vertices_.push_back(edge_midpoint(vertex(lo), vertex(hi)));
    mid = static_cast<int>(vertices_.size()) - 1;
    midpoint_.emplace(edge, mid);
    created = true;
  }

  adjacency_remove(element_id);
  parent.active = false;

  const int id1 = static_cast<int>(elements_.size());
  Element c1, c2;
  c1.v = {c, a, mid};
  c2.v = {b, c, mid};
  c1.generation = c2.generation = parent.generation + 1;
  c1.parent = c2.parent = element_id;
  elements_.push_back(c1);
  elements_.push_back(c2);
  elements_[static_cast<size_t>(element_id)].children = {id1, id1 + 1};
  adjacency_add(id1);
  adjacency_add(id1 + 1);
  active_count_ += 1;

  journal_.push_back({element_id, created});
  return {id1, id1 + 1};
}

size_t Mesh::mark_journal() { return journal_.size(); }

void Mesh::rollback_journal(size_t mark) {
  while (journal_.size() > mark) {
    const BisectRecord rec = journal_.back();
    journal_.pop_back();
    Element& parent = elements_[static_cast<size_t>(rec.parent)];
    const auto kids = parent.children;
    adjacency_remove(kids[0]);
    adjacency_remove(kids[1]);
    elements_.pop_back();
    elements_.pop_back();
    parent.children = {-1, -1};
    parent.active = true;
    adjacency_add(rec.parent);
    active_count_ -= 1;
    if (rec.midpoint_created) {
      midpoint_.erase(FaceKey(parent.v[0], parent.v[1]));
      vertices_.pop_back();
    }
  }
}

bool Mesh::has_hanging_edge(int elem_id) const {
  const auto& e = elements_[static_cast<size_t>(elem_id)];
  for (int i = 0; i < 3; ++i) {
    const FaceKey k(e.v[static_cast<size_t>(i)], e.v[static_cast<size_t>((i + 1) % 3)]);
    if (midpoint_.find(k) != midpoint_.end()) return true;
  }
  return false;
}

CompletionStats Mesh::complete() {
  CompletionStats stats;
  std::deque<int> work;
  for (size_t i = 0; i < elements_.size(); ++i)
    if (elements_[i].active && has_hanging_edge(static_cast<int>(i)))
      work.push_back(static_cast<int>(i));

  const long cap = 100L * (active_count_ + 10);
  while (!work.empty()) {
    const int id = work.front();
    work.pop_front();
    if (!elements_[static_cast<size_t>(id)].active) continue;
    if (!has_hanging_edge(id)) continue;
    const auto [c1, c2] = bisect(id);
    ++stats.bisections;
    if (stats.bisections > cap)
      throw NumericalError(
          "complete: iteration cap hit (inadmissible initial refinement-edge assignment?)");
    // bisecting may have hung the neighbor across the refinement edge
    const auto& e = elements_[static_cast<size_t>(id)];
    for (int nb : edge_elements(FaceKey(e.v[0], e.v[1])))
      if (nb >= 0) work.push_back(nb);
    if (has_hanging_edge(c1)) work.push_back(c1);
    if (has_hanging_edge(c2)) work.push_back(c2);
  }
  return stats;
}

bool Mesh::is_conforming() const {
  for (const auto& [key, slot] : edge_elems_) {
    (void)slot;
    if (midpoint_.find(key) != midpoint_.end()) return false;
  }
  return true;
}

std::vector<int> Mesh::active_elements() const {
  std::vector<int> out;
  out.reserve(static_cast<size_t>(active_count_));
  for (size_t i = 0; i < elements_.size(); ++i)
    if (elements_[i].active) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> Mesh::star(Vec2 z) const {
  std::vector<int> out;
  for (size_t i = 0; i < elements_.size(); ++i) {
    if (!elements_[i].active) continue;
    if (triangle(static_cast<int>(i)).contains(z, kGeomRelTol * 10)) out.push_back(static_cast<int>(i));
  }
  if (out.empty()) throw ConfigError("star: point outside domain");
  return out;
}

std::vector<int> Mesh::star(int vertex_id) const {
  std::vector<int> out;
  for (size_t i = 0; i < elements_.size(); ++i) {
    if (!elements_[i].active) continue;
    const auto& v = elements_[i].v;
    if (v[0] == vertex_id || v[1] == vertex_id || v[2] == vertex_id)
      out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> Mesh::patch(int element_id) const {
  const auto& e = elements_.at(static_cast<size_t>(element_id));
  std::set<int> acc;
  for (int vid : e.v)
    for (int k : star(vid)) acc.insert(k);
  return {acc.begin(), acc.end()};
}

bool Mesh::is_star_face_connected(Vec2 z) const {
  const auto s = star(z);
  if (s.size() <= 1) return true;
  // link two star elements when they share a full edge containing z
  const auto contains_z = [&](int a, int b) {
    const Vec2 pa = vertex(a), pb = vertex(b);
    const double tol = kGeomRelTol * 10 * dist(pa, pb);
    if (dist(z, pa) <= tol || dist(z, pb) <= tol) return true;
    return strictly_inside_segment(z, pa, pb, kGeomRelTol * 10);
  };
  std::vector<int> comp(s.size());
  for (size_t i = 0; i < s.size(); ++i) comp[i] = static_cast<int>(i);
  const auto find = [&](int i) {
    while (comp[static_cast<size_t>(i)] != i) i = comp[static_cast<size_t>(i)];
    return i;
  };
  for (size_t i = 0; i < s.size(); ++i) {
    const auto& vi = elements_[static_cast<size_t>(s[i])].v;
    for (size_t j = i + 1; j < s.size(); ++j) {
      const auto& vj = elements_[static_cast<size_t>(s[j])].v;
      int shared[3], n = 0;
      for (int p : vi)
        for (int q : vj)
          if (p == q) shared[n++] = p;
      if (n == 2 && contains_z(shared[0], shared[1]))
        comp[static_cast<size_t>(find(static_cast<int>(i)))] = find(static_cast<int>(j));
    }
  }
  const int root = find(0);
  for (size_t i = 1; i < s.size(); ++i)
    if (find(static_cast<int>(i)) != root) return false;
  return true;
}

ShapeMetrics Mesh::shape_metrics(int element_id) const {
  const Tri t = triangle(element_id);
  ShapeMetrics m;
  m.h = t.diameter();
  m.rho = t.incircle_diameter();
  m.sigma = m.h / m.rho;
  return m;
}

double Mesh::max_shape_coefficient() const {
  double s = 0.0;
  for (size_t i = 0; i < elements_.size(); ++i)
    if (elements_[i].active) s = std::max(s, shape_metrics(static_cast<int>(i)).sigma);
  return s;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (size_t i = 0; i < elements_.size(); ++i)
    if (elements_[i].active) a += triangle(static_cast<int>(i)).area();
  return a;
}

int Mesh::max_generation() const {
  int g = 0;
  for (const auto& e : elements_)
    if (e.active) g = std::max(g, e.generation);
  return g;
}

std::array<int, 2> Mesh::edge_elements(FaceKey k) const {
  auto it = edge_elems_.find(k);
  return it == edge_elems_.end() ? std::array<int, 2>{-1, -1} : it->second;
}

bool Mesh::is_boundary_edge(FaceKey k) const {
  const auto e = edge_elements(k);
  return (e[0] >= 0) != (e[1] >= 0);
}

std::optional<int> Mesh::midpoint_of(FaceKey k) const {
  auto it = midpoint_.find(k);
  if (it == midpoint_.end()) return std::nullopt;
  return it->second;
}

void uniform_refine(Mesh& mesh) {
  for (int id : mesh.active_elements()) mesh.bisect(id);
  mesh.complete();
}

Mesh unit_square_mesh() {
  return Mesh::from_arrays({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                           {{{0, 1, 2}}, {{0, 2, 3}}});
}

Mesh l_shape_mesh() {
  // fan around the reentrant corner; hypotenuses (the longest edges) lie on
  // the outer boundary, so the initial mesh is admissible for bisection
  const std::vector<Vec2> coords{{0, 0},  {1, 0},  {1, 1},  {0, 1},
                                 {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}};
  std::vector<std::array<int, 3>> tris;
  for (int i = 1; i < 7; ++i) tris.push_back({0, i, i + 1});
  return Mesh::from_arrays(coords, tris);
}

}  // namespace gradfit
