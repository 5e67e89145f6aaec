#pragma once

#include <cstddef>
#include <vector>

#include "motiondesk/image.hpp"

namespace md {

struct FlowVector {
  double dx = 0.0;
  double dy = 0.0;
  bool operator==(const FlowVector&) const = default;
};

/// Dense per-pixel displacement field, row-major.
struct FlowField {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<FlowVector> entries;

  FlowVector at(std::size_t x, std::size_t y) const { return entries[y * width + x]; }
  std::vector<double> magnitudes() const;
};

struct FlowSettings {
  std::size_t levels = 3;
  double smoothness_weight = 0.1;
  std::size_t iterations = 50;
};

/// Coarse-to-fine Horn-Schunck. A Gaussian pyramid of both frames is built;
/// starting from zero flow at the coarsest level, each level warps frame_b
/// by the current estimate, linearises the brightness constancy residual
/// and runs Horn-Schunck iterations on the total flow. The result is then
/// doubled and upsampled to seed the next finer level.
///
/// The returned field maps frame_a pixels to their position in frame_b:
/// frame_b(x + dx, y + dy) ~ frame_a(x, y).
FlowField compute_flow(const GrayImage& frame_a, const GrayImage& frame_b, const FlowSettings& settings = {});

}  // namespace md
