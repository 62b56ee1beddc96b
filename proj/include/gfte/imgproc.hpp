#pragma once

#include "gfte/image.hpp"

namespace gfte {

// One pass of a 3x3 minimum filter. Dark is low, so this thickens strokes; it
// never increases a pixel value.
Grayscale dilate_dark3x3(const Grayscale& img);

// Bilinear resize with the align-corners convention (corner pixels map onto
// corner pixels exactly). The same convention as grid sampling, so the
// geometry stays consistent between preprocessing and feature lookup.
Grayscale resize_bilinear(const Grayscale& img, int out_h, int out_w);

// Stroke thickening followed by a bilinear resize to 256x256.
Grayscale preprocess_image(const Grayscale& img);

inline constexpr int kModelImageSize = 256;

}  // namespace gfte
