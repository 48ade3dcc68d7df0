#pragma once

#include <stdexcept>
#include <string>

namespace similoc {

// Malformed or truncated input file (header, payload, or sidecar).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem-level failure: missing file, unwritable path.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input that is structurally valid but unusable (all-zero raster,
// path outside the map, trajectory too short...).
class DegenerateInput : public std::runtime_error {
 public:
  explicit DegenerateInput(const std::string& msg) : std::runtime_error(msg) {}
};

// The estimation loop stopped making progress (filter degenerate for too
// many consecutive frames).
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace similoc
