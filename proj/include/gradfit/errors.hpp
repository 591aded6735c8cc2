#pragma once

#include <stdexcept>
#include <string>

namespace gradfit {

// Bad inputs: unknown names, malformed meshes, out-of-range parameters.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Failures of the numerics at runtime: solver stagnation, composite
// quadrature not converging, enumeration budgets. CLI exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gradfit
