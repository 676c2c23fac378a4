#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace drive4d {

using Rgb = std::array<std::uint8_t, 3>;

// Row-major 8-bit RGB raster.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width*height*3

  ColorImage() = default;
  ColorImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  Rgb at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(int x, int y, const Rgb& c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    data[i] = c[0];
    data[i + 1] = c[1];
    data[i + 2] = c[2];
  }
  bool operator==(const ColorImage&) const = default;
};

// Millimeter depth, 0 = invalid. Max representable depth is 65.535 m.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> mm;

  DepthMap() = default;
  DepthMap(int w, int h) : width(w), height(h), mm(static_cast<std::size_t>(w) * h, 0) {}

  std::uint16_t at(int x, int y) const { return mm[static_cast<std::size_t>(y) * width + x]; }
  std::uint16_t& at(int x, int y) { return mm[static_cast<std::size_t>(y) * width + x]; }
  bool valid(int x, int y) const { return at(x, y) != 0; }
  double meters(int x, int y) const { return at(x, y) / 1000.0; }
  bool operator==(const DepthMap&) const = default;
};

// Single-channel 8-bit raster (occupancy masks).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const GrayImage&) const = default;
};

// Decoded PNG in its stored layout (no conversion).
struct PngRaster {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int channels = 0;
  std::vector<std::uint8_t> bytes;  // 16-bit samples are big-endian, as stored
};

struct PngInfo {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int channels = 0;
};

// Throws IoError on unreadable files and FormatError on undecodable content.
PngInfo read_png_info(const std::filesystem::path& path);
PngRaster read_png(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const ColorImage& img);
void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const DepthMap& depth);

// Accepts 8-bit RGB (or RGBA, alpha dropped) PNGs.
ColorImage read_color_png(const std::filesystem::path& path);
// Accepts 8-bit grayscale PNGs.
GrayImage read_gray_png(const std::filesystem::path& path);
// Accepts 16-bit single-channel PNGs only.
DepthMap read_depth_png(const std::filesystem::path& path);

}  // namespace drive4d
