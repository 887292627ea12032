#pragma once

#include <stdexcept>
#include <string>

namespace apex {

// Raised for malformed inputs: config files, track files, CLI arguments.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when the simulation produces non-finite state; the affected
// episode is terminated as failed.
class SimulationFault : public std::runtime_error {
 public:
  explicit SimulationFault(const std::string& msg)
      : std::runtime_error(msg) {}
};

// Raised when training hits non-finite losses or gradients.
class TrainingFault : public std::runtime_error {
 public:
  explicit TrainingFault(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised on wire-protocol violations.
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace apex
