#include "motiondesk/flow.hpp"

#include <cmath>
#include <string>

#include "motiondesk/error.hpp"

namespace md {

std::vector<double> FlowField::magnitudes() const {
  std::vector<double> out(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) out[i] = std::hypot(entries[i].dx, entries[i].dy);
  return out;
}

namespace {

// Separable [1 4 6 4 1]/16 blur followed by 2x decimation.
GrayImage pyr_down(const GrayImage& image) {
  static constexpr double kTaps[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  GrayImage horizontal(image.width, image.height);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      double acc = 0.0;
      for (int t = -2; t <= 2; ++t) acc += kTaps[t + 2] * image.clamped(static_cast<long>(x) + t, static_cast<long>(y));
      horizontal.at(x, y) = acc;
    }
  }
  GrayImage out((image.width + 1) / 2, (image.height + 1) / 2);
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) {
      double acc = 0.0;
      for (int t = -2; t <= 2; ++t) {
        acc += kTaps[t + 2] * horizontal.clamped(static_cast<long>(2 * x), static_cast<long>(2 * y) + t);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

struct FlowPlanes {
  std::size_t width = 0, height = 0;
  std::vector<double> u, v;
  FlowPlanes(std::size_t w, std::size_t h) : width(w), height(h), u(w * h, 0.0), v(w * h, 0.0) {}
  double clamped(const std::vector<double>& plane, long x, long y) const {
    x = std::clamp(x, 0L, static_cast<long>(width) - 1);
    y = std::clamp(y, 0L, static_cast<long>(height) - 1);
    return plane[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
  }
  double sample(const std::vector<double>& plane, double x, double y) const {
    const double fx = std::floor(x), fy = std::floor(y);
    const long x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
    const double ax = x - fx, ay = y - fy;
    const double top = (1 - ax) * clamped(plane, x0, y0) + ax * clamped(plane, x0 + 1, y0);
    const double bottom = (1 - ax) * clamped(plane, x0, y0 + 1) + ax * clamped(plane, x0 + 1, y0 + 1);
    return (1 - ay) * top + ay * bottom;
  }
};

// Doubles the flow and resamples it onto the finer grid.
FlowPlanes upsample(const FlowPlanes& coarse, std::size_t width, std::size_t height) {
  FlowPlanes fine(width, height);
  const double sx = static_cast<double>(coarse.width) / static_cast<double>(width);
  const double sy = static_cast<double>(coarse.height) / static_cast<double>(height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double cx = (static_cast<double>(x) + 0.5) * sx - 0.5;
      const double cy = (static_cast<double>(y) + 0.5) * sy - 0.5;
      fine.u[y * width + x] = 2.0 * coarse.sample(coarse.u, cx, cy);
      fine.v[y * width + x] = 2.0 * coarse.sample(coarse.v, cx, cy);
    }
  }
  return fine;
}

// Horn-Schunck neighbourhood mean: 1/6 for edge neighbours, 1/12 for corners.
double neighbourhood_mean(const FlowPlanes& flow, const std::vector<double>& plane, long x, long y) {
  const double edges = flow.clamped(plane, x - 1, y) + flow.clamped(plane, x + 1, y) +
                       flow.clamped(plane, x, y - 1) + flow.clamped(plane, x, y + 1);
  const double corners = flow.clamped(plane, x - 1, y - 1) + flow.clamped(plane, x + 1, y - 1) +
                         flow.clamped(plane, x - 1, y + 1) + flow.clamped(plane, x + 1, y + 1);
  return edges / 6.0 + corners / 12.0;
}

void refine_level(const GrayImage& a, const GrayImage& b, FlowPlanes& flow, const FlowSettings& settings) {
  const std::size_t w = a.width, h = a.height;
  GrayImage warped(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      warped.at(x, y) = b.sample(static_cast<double>(x) + flow.u[i], static_cast<double>(y) + flow.v[i]);
    }
  }
  std::vector<double> ix(w * h), iy(w * h), it(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const long lx = static_cast<long>(x), ly = static_cast<long>(y);
      const std::size_t i = y * w + x;
      ix[i] = 0.25 * (a.clamped(lx + 1, ly) - a.clamped(lx - 1, ly) + warped.clamped(lx + 1, ly) -
                      warped.clamped(lx - 1, ly));
      iy[i] = 0.25 * (a.clamped(lx, ly + 1) - a.clamped(lx, ly - 1) + warped.clamped(lx, ly + 1) -
                      warped.clamped(lx, ly - 1));
      it[i] = warped.at(x, y) - a.at(x, y);
    }
  }
  // Linearisation point: residual(u) ~ it + ix (u - u0) + iy (v - v0).
  const std::vector<double> u0 = flow.u, v0 = flow.v;
  for (std::size_t iter = 0; iter < settings.iterations; ++iter) {
    FlowPlanes next(w, h);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t i = y * w + x;
        const long lx = static_cast<long>(x), ly = static_cast<long>(y);
        const double ubar = neighbourhood_mean(flow, flow.u, lx, ly);
        const double vbar = neighbourhood_mean(flow, flow.v, lx, ly);
        const double residual = it[i] + ix[i] * (ubar - u0[i]) + iy[i] * (vbar - v0[i]);
        const double denom = settings.smoothness_weight + ix[i] * ix[i] + iy[i] * iy[i];
        next.u[i] = ubar - ix[i] * residual / denom;
        next.v[i] = vbar - iy[i] * residual / denom;
      }
    }
    flow.u.swap(next.u);
    flow.v.swap(next.v);
  }
}

}  // namespace

FlowField compute_flow(const GrayImage& frame_a, const GrayImage& frame_b, const FlowSettings& settings) {
  if (frame_a.width != frame_b.width || frame_a.height != frame_b.height) {
    throw ShapeError("compute_flow: frame sizes differ (" + std::to_string(frame_a.width) + "x" +
                     std::to_string(frame_a.height) + " vs " + std::to_string(frame_b.width) + "x" +
                     std::to_string(frame_b.height) + ")");
  }
  if (settings.levels == 0) throw ConfigError("compute_flow: levels must be at least 1");
  if (!(settings.smoothness_weight > 0.0)) throw ConfigError("compute_flow: smoothness_weight must be positive");
  const std::size_t min_side = std::size_t{1} << settings.levels;
  if (frame_a.width < min_side || frame_a.height < min_side) {
    throw ShapeError("compute_flow: " + std::to_string(frame_a.width) + "x" + std::to_string(frame_a.height) +
                     " frames are smaller than 2^levels = " + std::to_string(min_side));
  }
  if (frame_a.width < 16 || frame_a.height < 16) {
    throw ShapeError("compute_flow: frames must be at least 16x16");
  }

  std::vector<GrayImage> pyr_a{frame_a}, pyr_b{frame_b};
  for (std::size_t level = 1; level < settings.levels; ++level) {
    pyr_a.push_back(pyr_down(pyr_a.back()));
    pyr_b.push_back(pyr_down(pyr_b.back()));
  }

  FlowPlanes flow(pyr_a.back().width, pyr_a.back().height);
  for (std::size_t level = settings.levels; level-- > 0;) {
    const GrayImage& a = pyr_a[level];
    if (flow.width != a.width || flow.height != a.height) flow = upsample(flow, a.width, a.height);
    refine_level(a, pyr_b[level], flow, settings);
  }

  FlowField result;
  result.width = frame_a.width;
  result.height = frame_a.height;
  result.entries.resize(flow.u.size());
  for (std::size_t i = 0; i < flow.u.size(); ++i) result.entries[i] = {flow.u[i], flow.v[i]};
  return result;
}

}  // namespace md
