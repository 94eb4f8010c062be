#pragma once

#include <stdexcept>
#include <string>

namespace nudg {

/// Bad input: a violated precondition, malformed spec or incompatible pairing.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: divergence, non-convergence, undefined quantity.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nudg
