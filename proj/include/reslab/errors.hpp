#pragma once

#include <stdexcept>
#include <string>

namespace reslab {

// Invalid configuration or violated operation precondition. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failure (non-convergence, NaN state, ...). CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A trajectory of the deterministic flow left the escape radius; the field
// violates the inward-drift growth condition.
class FieldDivergenceError : public NumericError {
 public:
  explicit FieldDivergenceError(const std::string& what) : NumericError(what) {}
};

}  // namespace reslab
