// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#include "ccpv/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "ccpv/common.hpp"

namespace ccpv {
namespace {

ImageArray to_gray(const ImageArray& image) {
  if (image.channels == 1) return image;
  ImageArray gray(1, image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      gray.at(0, y, x) = 0.299 * image.at(0, y, x) + 0.587 * image.at(1, y, x) +
                         0.114 * image.at(2, y, x);
    }
  }
  return gray;
}

ImageArray resize_bilinear(const ImageArray& image, int side) {
  if (image.height == side && image.width == side) return image;
  ImageArray out(image.channels, side, side);
  const double sy = static_cast<double>(image.height) / side;
  const double sx = static_cast<double>(image.width) / side;
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < side; ++y) {
      const double fy = (y + 0.5) * sy - 0.5;
      const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, image.height - 1);
      const int y1 = std::min(y0 + 1, image.height - 1);
      const double wy = std::clamp(fy - y0, 0.0, 1.0);
      for (int x = 0; x < side; ++x) {
        const double fx = (x + 0.5) * sx - 0.5;
        const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, image.width - 1);
        const int x1 = std::min(x0 + 1, image.width - 1);
        const double wx = std::clamp(fx - x0, 0.0, 1.0);
        const double top = (1.0 - wx) * image.at(c, y0, x0) + wx * image.at(c, y0, x1);
        const double bot = (1.0 - wx) * image.at(c, y1, x0) + wx * image.at(c, y1, x1);
        out.at(c, y, x) = (1.0 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

}  // namespace

ImageArray flip(const ImageArray& image) {
  if (image.height <= 0 || image.width <= 0)
    raise(ErrorCode::DegenerateImage, "cannot flip a zero-area image");
  ImageArray out(image.channels, image.height, image.width);
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) {
        out.at(c, y, x) = image.at(c, y, image.width - 1 - x);
      }
    }
  }
  return out;
}

ImageArray preprocess(const ImageArray& image, const PreprocessOptions& options) {
  if (image.height <= 0 || image.width <= 0 || image.channels <= 0)
    raise(ErrorCode::DegenerateImage, "cannot preprocess a zero-area image");
  if (options.target_side <= 0)
    raise(ErrorCode::Usage, "preprocess target_side must be positive");

  ImageArray out = resize_bilinear(to_gray(image), options.target_side);
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);

  if (options.standardize) {
    double mean = 0.0;
    for (double v : out.data) mean += v;
    mean /= static_cast<double>(out.data.size());
    double var = 0.0;
    for (double v : out.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(out.data.size());
    const double scale = 1.0 / (std::sqrt(var) + options.eps);
    for (double& v : out.data) v = (v - mean) * scale;
  }
  return out;
}

}  // namespace ccpv
