#pragma once

#include <stdexcept>
#include <string>

namespace adgmarl {

/// Raised when user-supplied data (graphs, games, policies, configs) violates
/// a structural invariant. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Joint-action enumeration would exceed the configured cap.
class EnumerationCapError : public ValidationError {
 public:
  explicit EnumerationCapError(const std::string& what) : ValidationError(what) {}
};

}  // namespace adgmarl
