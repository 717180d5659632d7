// Copyright (c) 2026 The CCPV Authors
//
// This source code is licensed under the Apache-2.0 license found in the
// LICENSE file in the root directory of this source tree.

#ifndef CCPV_TRANSFORMS_HPP
#define CCPV_TRANSFORMS_HPP

#include "ccpv/image.hpp"

namespace ccpv {

// Horizontal mirror about the vertical axis. Involutive: flip(flip(x)) == x
// bit-exactly. Shape and the pixel multiset of every row are preserved.
ImageArray flip(const ImageArray& image);

struct PreprocessOptions {
  int target_side = 128;
  // Subtract the per-image mean and divide by the per-image stddev (+eps).
  // Off by default so outputs stay in [0, 1].
  bool standardize = false;
  double eps = 1e-6;
};

// Canonical model input: grayscale, square target_side x target_side,
// bilinear resampling with half-pixel centers (symmetric, so resizing
// commutes with flip on square inputs).
ImageArray preprocess(const ImageArray& image, const PreprocessOptions& options);

}  // namespace ccpv

#endif  // CCPV_TRANSFORMS_HPP
