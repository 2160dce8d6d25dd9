#pragma once

#include <cstddef>

#include "flowvs/geometry.hpp"

namespace flowvs {

/// Uniform grid of feature nodes over the image with a half-cell margin.
/// Nodes are ordered row-major: index = row * cols + col.
struct FeatureGrid {
  int cols = 32;
  int rows = 32;
  int image_width = 160;
  int image_height = 120;

  FeatureGrid() = default;
  FeatureGrid(int c, int r, int w, int h);
  FeatureGrid(int c, int r, const Intrinsics& k) : FeatureGrid(c, r, k.width, k.height) {}
  explicit FeatureGrid(const Intrinsics& k) : FeatureGrid(32, 32, k) {}

  std::size_t size() const { return static_cast<std::size_t>(cols) * rows; }
  Vec2 node(std::size_t i) const {
    const double col = static_cast<double>(i % cols);
    const double row = static_cast<double>(i / cols);
    return {(col + 0.5) * image_width / cols, (row + 0.5) * image_height / rows};
  }
  bool operator==(const FeatureGrid&) const = default;
};

}  // namespace flowvs
