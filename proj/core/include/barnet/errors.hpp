#pragma once

#include <stdexcept>
#include <string>

namespace barnet {

// Bad dimensions, out-of-range parameters, malformed configuration.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Failures while processing otherwise well-configured inputs
// (unreadable files, reject thresholds, diverged solves).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace barnet
