#pragma once

#include <cstdint>
#include <vector>

namespace cbmr {

/// Row-major 0/1 mask.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryImage() = default;
  BinaryImage(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }
};

}  // namespace cbmr
