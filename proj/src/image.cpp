#include "rsrf/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "rsrf/error.hpp"

namespace rsrf {
namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image quantize8(const Image& img) {
  Image out = img;
  for (double& v : out.data) v = to_byte(v) / 255.0;
  return out;
}

std::vector<std::uint8_t> to_bytes8(const Image& img) {
  std::vector<std::uint8_t> out(img.data.size());
  std::transform(img.data.begin(), img.data.end(), out.begin(), to_byte);
  return out;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  const auto bytes = to_bytes8(img);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(bytes.data() + 3ull * y * img.width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  Image img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng failed reading " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
  img = Image(w, h);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int i = 0; i < 3 * w; ++i) img.data[3ull * y * w + i] = row[i] / 255.0;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_pfm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "PF\n" << img.width << ' ' << img.height << "\n-1.0\n";
  // PFM scanlines run bottom to top.
  for (int y = img.height - 1; y >= 0; --y) {
    for (int i = 0; i < 3 * img.width; ++i) {
      const float v = static_cast<float>(img.data[3ull * y * img.width + i]);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Image read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  in.get();
  if (magic != "PF" || w <= 0 || h <= 0 || scale >= 0.0) {
    throw IoError(path.string() + ": unsupported PFM (need little-endian color PF)");
  }
  Image img(w, h);
  for (int y = h - 1; y >= 0; --y) {
    for (int i = 0; i < 3 * w; ++i) {
      float v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      img.data[3ull * y * w + i] = v;
    }
  }
  if (!in) throw IoError(path.string() + ": truncated PFM");
  return img;
}

Image read_image(const std::filesystem::path& path) {
  return path.extension() == ".pfm" ? read_pfm(path) : read_png(path);
}

}  // namespace rsrf
