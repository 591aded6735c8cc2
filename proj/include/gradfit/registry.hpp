#pragma once

#include <map>
#include <string>
#include <vector>

#include "gradfit/mesh.hpp"
#include "gradfit/target.hpp"

namespace gradfit {

struct RegistryEntry {
  TargetFunction fn;
  bool dirichlet0_ok = false;
  std::string default_mesh = "builtin:unit-square";
};

// Named target functions for the experiment drivers. Gradients are checked
// against finite differences when the registry is built.
const std::vector<std::pair<std::string, RegistryEntry>>& registry();

const RegistryEntry& find_function(const std::string& name);

// "builtin:unit-square", "builtin:l-shape", or a mesh file path.
Mesh mesh_from_spec(const std::string& spec);

// Bivariate polynomial with dense power-basis coefficients; exact
// derivatives of any order.
class Poly2 {
 public:
  explicit Poly2(std::map<std::pair<int, int>, double> coeffs);

  double value(Vec2 p) const;
  Vec2 gradient(Vec2 p) const;
  std::vector<double> deriv(Vec2 p, int order) const;
  TargetFunction as_target(const std::string& name) const;

 private:
  double partial(Vec2 p, int ax, int ay) const;
  std::map<std::pair<int, int>, double> c_;
};

}  // namespace gradfit
