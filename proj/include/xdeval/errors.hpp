#pragma once

#include <stdexcept>
#include <string>

namespace xdeval {

// Bad inputs: malformed config, contract violations, out-of-range values.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem and adapter failures. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace xdeval
