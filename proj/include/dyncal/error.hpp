#pragma once

#include <stdexcept>
#include <string>

namespace dyncal {

/// Malformed or inconsistent input data (files, windows, weights).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad user-supplied configuration (schedule grammar, estimator name, flags).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values produced during a numerical computation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dyncal
