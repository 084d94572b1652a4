#pragma once
#include <stdexcept>
#include <string>

namespace cfran {

// Config parse/validation failures. CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Geometry/partition combinations where the closed-form machinery breaks down
// (empty exclusion set, Gamma shape <= 1, too few RRUs per EDU). Exit code 2.
class DegenerateGeometry : public std::runtime_error {
 public:
  explicit DegenerateGeometry(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically singular combining problem (rank-deficient H, condition > 1e12).
class SingularMatrix : public std::runtime_error {
 public:
  explicit SingularMatrix(const std::string& msg) : std::runtime_error(msg) {}
};

// Requests outside the supported model, e.g. closed-form bounds with N > 1.
class UnsupportedConfig : public std::runtime_error {
 public:
  explicit UnsupportedConfig(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cfran
