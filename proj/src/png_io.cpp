#include <png.h>

#include <cstdio>
#include <memory>

#include "drive4d/error.hpp"
#include "drive4d/image.hpp"

namespace drive4d {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return f;
}

[[noreturn]] void png_error_handler(png_structp, png_const_charp msg) {
  throw Error(ErrorKind::FormatError, msg);
}

void png_warning_handler(png_structp, png_const_charp) {}

class PngReader {
 public:
  PngReader() {
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                  png_warning_handler);
    if (!png_) throw Error(ErrorKind::FormatError, "png_create_read_struct failed");
    info_ = png_create_info_struct(png_);
    if (!info_) {
      png_destroy_read_struct(&png_, nullptr, nullptr);
      throw Error(ErrorKind::FormatError, "png_create_info_struct failed");
    }
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

 private:
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngWriter {
 public:
  PngWriter() {
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                   png_warning_handler);
    if (!png_) throw Error(ErrorKind::IoError, "png_create_write_struct failed");
    info_ = png_create_info_struct(png_);
    if (!info_) {
      png_destroy_write_struct(&png_, nullptr);
      throw Error(ErrorKind::IoError, "png_create_info_struct failed");
    }
  }
  ~PngWriter() { png_destroy_write_struct(&png_, &info_); }
  PngWriter(const PngWriter&) = delete;
  PngWriter& operator=(const PngWriter&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

 private:
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

void write_raw(const std::filesystem::path& path, int width, int height, int bit_depth,
               int color_type, int row_bytes, const std::uint8_t* rows) {
  FilePtr f = open_file(path, "wb");
  PngWriter w;
  png_init_io(w.png(), f.get());
  png_set_IHDR(w.png(), w.info(), width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(w.png(), 6);
  png_write_info(w.png(), w.info());
  for (int y = 0; y < height; ++y) {
    png_write_row(w.png(), const_cast<png_bytep>(rows + static_cast<std::size_t>(y) * row_bytes));
  }
  png_write_end(w.png(), nullptr);
}

}  // namespace

PngInfo read_png_info(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorKind::FormatError, path.string() + " is not a PNG file");
  }
  PngReader r;
  png_init_io(r.png(), f.get());
  png_set_sig_bytes(r.png(), 8);
  png_read_info(r.png(), r.info());
  PngInfo info;
  info.width = static_cast<int>(png_get_image_width(r.png(), r.info()));
  info.height = static_cast<int>(png_get_image_height(r.png(), r.info()));
  info.bit_depth = png_get_bit_depth(r.png(), r.info());
  info.channels = png_get_channels(r.png(), r.info());
  return info;
}

PngRaster read_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorKind::FormatError, path.string() + " is not a PNG file");
  }
  PngReader r;
  png_init_io(r.png(), f.get());
  png_set_sig_bytes(r.png(), 8);
  png_read_info(r.png(), r.info());

  PngRaster out;
  out.width = static_cast<int>(png_get_image_width(r.png(), r.info()));
  out.height = static_cast<int>(png_get_image_height(r.png(), r.info()));
  out.bit_depth = png_get_bit_depth(r.png(), r.info());
  out.channels = png_get_channels(r.png(), r.info());
  if (png_get_color_type(r.png(), r.info()) == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(r.png());
    png_read_update_info(r.png(), r.info());
    out.channels = png_get_channels(r.png(), r.info());
  }
  const std::size_t row_bytes = png_get_rowbytes(r.png(), r.info());
  out.bytes.resize(row_bytes * out.height);
  for (int y = 0; y < out.height; ++y) {
    png_read_row(r.png(), out.bytes.data() + row_bytes * y, nullptr);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const ColorImage& img) {
  write_raw(path, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, img.width * 3, img.data.data());
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
  write_raw(path, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, img.width, img.data.data());
}

void write_png(const std::filesystem::path& path, const DepthMap& depth) {
  std::vector<std::uint8_t> be(depth.mm.size() * 2);
  for (std::size_t i = 0; i < depth.mm.size(); ++i) {
    be[2 * i] = static_cast<std::uint8_t>(depth.mm[i] >> 8);
    be[2 * i + 1] = static_cast<std::uint8_t>(depth.mm[i] & 0xff);
  }
  write_raw(path, depth.width, depth.height, 16, PNG_COLOR_TYPE_GRAY, depth.width * 2, be.data());
}

ColorImage read_color_png(const std::filesystem::path& path) {
  const PngRaster raw = read_png(path);
  if (raw.bit_depth != 8 || (raw.channels != 3 && raw.channels != 4)) {
    throw Error(ErrorKind::FormatError, path.string() + ": expected 8-bit RGB PNG");
  }
  ColorImage img(raw.width, raw.height);
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) img.data[3 * i + c] = raw.bytes[raw.channels * i + c];
  }
  return img;
}

GrayImage read_gray_png(const std::filesystem::path& path) {
  const PngRaster raw = read_png(path);
  if (raw.bit_depth != 8 || raw.channels != 1) {
    throw Error(ErrorKind::FormatError, path.string() + ": expected 8-bit grayscale PNG");
  }
  GrayImage img(raw.width, raw.height);
  img.data = raw.bytes;
  return img;
}

DepthMap read_depth_png(const std::filesystem::path& path) {
  const PngRaster raw = read_png(path);
  if (raw.bit_depth != 16 || raw.channels != 1) {
    throw Error(ErrorKind::FormatError,
                path.string() + ": expected 16-bit single-channel PNG, got " +
                    std::to_string(raw.bit_depth) + "-bit with " + std::to_string(raw.channels) +
                    " channel(s)");
  }
  DepthMap d(raw.width, raw.height);
  for (std::size_t i = 0; i < d.mm.size(); ++i) {
    d.mm[i] = static_cast<std::uint16_t>((raw.bytes[2 * i] << 8) | raw.bytes[2 * i + 1]);
  }
  return d;
}

}  // namespace drive4d
