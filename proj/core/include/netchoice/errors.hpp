#pragma once

#include <stdexcept>
#include <string>

namespace netchoice {

// Malformed or inconsistent input data (bad edge lists, impossible events).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration (model parameters, feature declarations, CLI flags).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An iterative procedure failed to reach its stopping criteria.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace netchoice
