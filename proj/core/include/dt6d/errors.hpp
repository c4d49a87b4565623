#pragma once

#include <stdexcept>
#include <string>

namespace dt6d {

/// Malformed or unreadable file content (mesh, dataset, model, PNG).
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or CLI input.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The tracked object left the usable viewing volume (behind camera,
/// degenerate crop). Callers decide whether to reset.
class TrackingLost : public std::runtime_error {
public:
  explicit TrackingLost(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dt6d
