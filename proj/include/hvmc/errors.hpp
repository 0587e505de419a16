#pragma once

#include <stdexcept>
#include <string>

namespace hvmc {

// Configuration / schema problems; the CLI maps these to exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-recoverable numerical failure (exit code 2).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Size guards on exponential-cost paths (exit code 3).
struct ResourceLimitError : std::runtime_error {
  explicit ResourceLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hvmc
