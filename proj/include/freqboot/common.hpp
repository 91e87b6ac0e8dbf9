#pragma once

#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace freqboot {

/// Bad or inconsistent configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unreadable, malformed, or inconsistent data (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training diverged or internal state is inconsistent (CLI exit code 3).
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mismatched parameter trees and similar internal contract violations.
class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Process-wide sink for non-fatal numeric/data warnings. Callers that emit
/// reports drain it and attach the messages.
class WarningLog {
 public:
  static void add(std::string msg);
  static std::vector<std::string> drain();
  static std::size_t count();

 private:
  static std::mutex& mu();
  static std::vector<std::string>& log();
};

}  // namespace freqboot
