// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include "ccpv/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "ccpv/common.hpp"

namespace ccpv {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

ImageArray load_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) raise(ErrorCode::Io, "cannot open image for reading: " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) raise(ErrorCode::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    raise(ErrorCode::Io, "png_create_info_struct failed");
  }

  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::BadFormat, "corrupt or unreadable PNG: " + path);
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::BadFormat,
          "unsupported channel count after decode: " + std::to_string(channels));
  }

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ImageArray image(channels, static_cast<int>(height), static_cast<int>(width));
  for (int y = 0; y < image.height; ++y) {
    const png_byte* row = buffer.data() + static_cast<std::size_t>(y) * row_bytes;
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < channels; ++c) {
        image.at(c, y, x) = row[x * channels + c] / 255.0;
      }
    }
  }
  return image;
}

void save_png_gray8(const ImageArray& image, const std::string& path) {
  if (image.channels != 1)
    raise(ErrorCode::ShapeMismatch, "save_png_gray8 expects a 1-channel image");
  if (image.height <= 0 || image.width <= 0)
    raise(ErrorCode::DegenerateImage, "cannot encode a zero-area image");

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) raise(ErrorCode::Io, "cannot open image for writing: " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) raise(ErrorCode::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    raise(ErrorCode::Io, "png_create_info_struct failed");
  }

  std::vector<png_byte> bytes(static_cast<std::size_t>(image.height) * image.width);
  std::vector<png_bytep> rows(image.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    raise(ErrorCode::Io, "PNG encode failed: " + path);
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      double v = image.at(0, y, x);
      v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      bytes[static_cast<std::size_t>(y) * image.width + x] =
          static_cast<png_byte>(std::lround(v * 255.0));
    }
    rows[y] = bytes.data() + static_cast<std::size_t>(y) * image.width;
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace ccpv
