#pragma once

#include <stdexcept>
#include <string>

namespace xtal {

// Bad arguments, malformed specs, out-of-range parameters. CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or inconsistent files (headers, payload sizes). CLI exit code 2.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures of the analysis itself (no dominant band, empty retention set,
// degenerate geometry). CLI exit code 3.
class AnalysisError : public std::runtime_error {
 public:
  explicit AnalysisError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace xtal
