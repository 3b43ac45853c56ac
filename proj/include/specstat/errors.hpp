#pragma once
#include <stdexcept>
#include <string>

namespace specstat {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 2, NumericError -> 3, IoError -> 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace specstat
