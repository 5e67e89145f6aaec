#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace md {

/// Grayscale image, row-major, values nominally in [0, 1].
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), pixels(w * h, fill) {}

  double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  // Replicate-border access.
  double clamped(long x, long y) const;
  // Bilinear sample with replicate border.
  double sample(double x, double y) const;

  bool operator==(const GrayImage&) const = default;
};

// Binary P5, 8-bit. Values are clamped to [0,1] and rounded to 1/255 steps.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

// Round-trips an image through 8-bit quantisation (what write/read_pgm does).
GrayImage quantize_8bit(const GrayImage& image);

}  // namespace md
