#pragma once

#include <stdexcept>
#include <string>

namespace ccs {

// Malformed or truncated serialized data (bad magic, version, length, or
// internally inconsistent sections).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Geometric configuration that admits no unique solution (e.g. collinear or
// otherwise rank-deficient point sets in pose estimation).
class DegenerateGeometry : public std::runtime_error {
 public:
  explicit DegenerateGeometry(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace ccs
