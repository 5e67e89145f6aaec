#include "motiondesk/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "motiondesk/error.hpp"

namespace md {

double GrayImage::clamped(long x, long y) const {
  x = std::clamp(x, 0L, static_cast<long>(width) - 1);
  y = std::clamp(y, 0L, static_cast<long>(height) - 1);
  return pixels[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
}

double GrayImage::sample(double x, double y) const {
  const double fx = std::floor(x), fy = std::floor(y);
  const long x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
  const double ax = x - fx, ay = y - fy;
  const double top = (1.0 - ax) * clamped(x0, y0) + ax * clamped(x0 + 1, y0);
  const double bottom = (1.0 - ax) * clamped(x0, y0 + 1) + ax * clamped(x0 + 1, y0 + 1);
  return (1.0 - ay) * top + ay * bottom;
}

namespace {
unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// Skips whitespace and '#' comments between PGM header tokens.
std::size_t read_header_number(std::istream& in, const std::filesystem::path& path) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  std::size_t value = 0;
  if (!(in >> value)) throw IoError("pgm: malformed header in " + path.string());
  return value;
}
}  // namespace

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<char> bytes(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), bytes.begin(),
                 [](double v) { return static_cast<char>(to_byte(v)); });
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError("pgm: " + path.string() + " is not binary P5");
  const std::size_t width = read_header_number(in, path);
  const std::size_t height = read_header_number(in, path);
  const std::size_t maxval = read_header_number(in, path);
  if (maxval == 0 || maxval > 255) throw IoError("pgm: only 8-bit images supported: " + path.string());
  in.get();
  std::vector<unsigned char> bytes(width * height);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) throw IoError("pgm: truncated " + path.string());
  GrayImage image(width, height);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    image.pixels[i] = static_cast<double>(bytes[i]) / static_cast<double>(maxval);
  }
  return image;
}

GrayImage quantize_8bit(const GrayImage& image) {
  GrayImage out = image;
  for (double& v : out.pixels) v = static_cast<double>(to_byte(v)) / 255.0;
  return out;
}

}  // namespace md
