#include "emoface/pipeline/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "emoface/errors.hpp"

namespace emoface::pipeline {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t to_byte(float v) {
  const float c = std::clamp(v, -1.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround((c + 1.0f) * 127.5f));
}

float from_byte(std::uint8_t b) { return static_cast<float>(b) / 127.5f - 1.0f; }

// Decodes to 8-bit RGB or gray; `channels` receives 3 or 1.
std::vector<std::uint8_t> decode(const std::filesystem::path& path, int& width, int& height, int& channels) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error("cannot open image " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("not a PNG file: " + path.string(), 0);
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng initialisation failed");
  }
  std::vector<std::uint8_t> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG data in " + path.string(), 8);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  pixels.resize(row_bytes * static_cast<std::size_t>(height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[static_cast<std::size_t>(y)] = pixels.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (channels != 1 && channels != 3) throw FormatError("unsupported PNG channel layout", 0);
  return pixels;
}

void encode(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels, int width, int height,
            int channels) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error("cannot write image " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encoding failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + stride * static_cast<std::size_t>(y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void check_image(const nn::Tensor& image, int channels, const char* what) {
  if (image.ndim() != 3 || image.dim(0) != channels) {
    throw ContractError(std::string(what) + ": expected [" + std::to_string(channels) + ", H, W], got " +
                        nn::shape_string(image.shape()));
  }
}

}  // namespace

nn::Tensor read_png(const std::filesystem::path& path) {
  int w = 0, h = 0, c = 0;
  const auto px = decode(path, w, h, c);
  nn::Tensor out({3, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < 3; ++k) {
        const std::size_t src = (static_cast<std::size_t>(y) * w + x) * c + (c == 3 ? k : 0);
        out.at(k, y, x) = from_byte(px[src]);
      }
  return out;
}

void write_png(const std::filesystem::path& path, const nn::Tensor& image) {
  check_image(image, 3, "write_png");
  const int h = image.dim(1), w = image.dim(2);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < 3; ++k) px[(static_cast<std::size_t>(y) * w + x) * 3 + k] = to_byte(image.at(k, y, x));
  encode(path, px, w, h, 3);
}

nn::Tensor read_mask_png(const std::filesystem::path& path) {
  int w = 0, h = 0, c = 0;
  const auto px = decode(path, w, h, c);
  nn::Tensor out({1, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t src = (static_cast<std::size_t>(y) * w + x) * c;
      out.at(0, y, x) = px[src] >= 128 ? 1.0f : 0.0f;
    }
  return out;
}

void write_mask_png(const std::filesystem::path& path, const nn::Tensor& mask) {
  check_image(mask, 1, "write_mask_png");
  const int h = mask.dim(1), w = mask.dim(2);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) px[static_cast<std::size_t>(y) * w + x] = mask.at(0, y, x) >= 0.5f ? 255 : 0;
  encode(path, px, w, h, 1);
}

nn::Tensor quantize_8bit(const nn::Tensor& image) {
  nn::Tensor out = image;
  for (auto& v : out.values()) v = from_byte(to_byte(v));
  return out;
}

}  // namespace emoface::pipeline
