#pragma once

#include <stdexcept>
#include <string>

namespace unotb {

// Error taxonomy mirrored by the CLI exit codes: config errors exit 2,
// numeric failures exit 3, I/O problems exit 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace unotb
