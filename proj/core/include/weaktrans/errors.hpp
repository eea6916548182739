#pragma once

#include <stdexcept>

namespace weaktrans {

/// A precondition on parameters, indices or supports was violated.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed: quadrature non-convergence, a non-finite
/// integrand value, or a decomposition that did not converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace weaktrans
