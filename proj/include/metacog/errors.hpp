#pragma once

#include <stdexcept>
#include <string>

namespace metacog {

// Invalid or inconsistent configuration. CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Corrupted or malformed data fed into a computation (non-finite TD errors,
// unparseable trace lines, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Missing or incomplete run artifacts. CLI maps this to exit code 3.
class ArtifactError : public std::runtime_error {
 public:
  explicit ArtifactError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace metacog
