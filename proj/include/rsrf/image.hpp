#pragma once

// RGB images stored as interleaved doubles in [0, 1], row-major.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rsrf/lie.hpp"

namespace rsrf {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // 3 * width * height

  Image() = default;
  Image(int w, int h, double fill = 0.0) : width(w), height(h), data(3ull * w * h, fill) {}

  Vec3 at(int x, int y) const {
    const double* p = data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, const Vec3& c) {
    double* p = data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }
  bool operator==(const Image&) const = default;
};

/// Rounds every channel to the nearest of 256 levels (what an 8-bit PNG stores).
Image quantize8(const Image& img);
std::vector<std::uint8_t> to_bytes8(const Image& img);

void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

/// Portable float map (color "PF"), little-endian, for quantization-free data.
void write_pfm(const std::filesystem::path& path, const Image& img);
Image read_pfm(const std::filesystem::path& path);

/// Chooses PNG or PFM by extension.
Image read_image(const std::filesystem::path& path);

}  // namespace rsrf
