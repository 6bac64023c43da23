#pragma once

#include <stdexcept>

namespace atomo {

/// Invalid input: malformed geometry, config, file or mismatched shapes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: divergence, non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace atomo
