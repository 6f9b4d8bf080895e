#pragma once

#include <stdexcept>
#include <string>

namespace neurodens {

// Config / precondition violations. The CLI maps these to exit code 2.
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Runtime numerical failures (negativity, non-convergence, truncation
// breaches). The CLI maps these to exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace neurodens
