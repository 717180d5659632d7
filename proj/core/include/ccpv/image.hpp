// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#ifndef CCPV_IMAGE_HPP
#define CCPV_IMAGE_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace ccpv {

// Dense image in CHW layout. Pixel values are real and live in [0, 1] unless
// a transform (e.g. standardization) explicitly rescales them.
struct ImageArray {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;  // size == channels * height * width

  ImageArray() = default;
  ImageArray(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, 0.0) {}

  double& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  std::size_t size() const { return data.size(); }
};

// Decodes an 8- or 16-bit PNG into [0, 1] reals. Grayscale stays 1-channel,
// color decodes to 3 channels; alpha is dropped.
ImageArray load_png(const std::string& path);

// Writes a 1-channel image as 8-bit grayscale PNG, quantizing round(v * 255)
// after clamping to [0, 1].
void save_png_gray8(const ImageArray& image, const std::string& path);

}  // namespace ccpv

#endif  // CCPV_IMAGE_HPP
