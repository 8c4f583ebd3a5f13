#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nsdt {

// Raised when a configuration document or preset violates its invariants.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an API is driven out of contract (e.g. stepping a finished
// episode, requesting gradients before a forward pass).
struct UsageError : std::logic_error {
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

// Raised on shape mismatches in the numeric substrate.
struct ShapeError : std::logic_error {
  explicit ShapeError(const std::string& what) : std::logic_error(what) {}
};

struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline int manhattan(const Cell& a, const Cell& b) {
  int dr = a.row - b.row;
  int dc = a.col - b.col;
  return (dr < 0 ? -dr : dr) + (dc < 0 ? -dc : dc);
}

}  // namespace nsdt
