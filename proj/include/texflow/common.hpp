#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace texflow {

inline constexpr const char* kVersion = "0.1.0";

// Process exit codes used by the texflow tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitDivergence = 3,
  kExitIo = 4,
};

// Invalid or inconsistent configuration (bad spec values, unknown keys, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical blow-up: non-finite values, non-positive density, velocity
// outside the stability envelope. Carries the location when known.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long long timestep = -1,
                  int node_y = -1, int node_x = -1)
      : std::runtime_error(what),
        timestep_(timestep),
        node_y_(node_y),
        node_x_(node_x) {}

  long long timestep() const { return timestep_; }
  int node_y() const { return node_y_; }
  int node_x() const { return node_x_; }

 private:
  long long timestep_;
  int node_y_;
  int node_x_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace texflow
