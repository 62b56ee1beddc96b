#include "gfte/imgproc.hpp"

#include <algorithm>
#include <cmath>

#include "gfte/error.hpp"

namespace gfte {

Grayscale dilate_dark3x3(const Grayscale& img) {
  const Eigen::Index h = img.rows(), w = img.cols();
  if (h < 1 || w < 1) throw DataError("dilate_dark3x3: empty image");
  Grayscale out(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    const Eigen::Index y0 = std::max<Eigen::Index>(0, y - 1);
    const Eigen::Index y1 = std::min<Eigen::Index>(h - 1, y + 1);
    for (Eigen::Index x = 0; x < w; ++x) {
      const Eigen::Index x0 = std::max<Eigen::Index>(0, x - 1);
      const Eigen::Index x1 = std::min<Eigen::Index>(w - 1, x + 1);
      out(y, x) = img.block(y0, x0, y1 - y0 + 1, x1 - x0 + 1).minCoeff();
    }
  }
  return out;
}

Grayscale resize_bilinear(const Grayscale& img, int out_h, int out_w) {
  const Eigen::Index h = img.rows(), w = img.cols();
  if (h < 1 || w < 1) throw DataError("resize_bilinear: empty image");
  if (out_h < 1 || out_w < 1) throw UsageError("resize_bilinear: output dims must be positive");
  Grayscale out(out_h, out_w);
  const double sy = out_h > 1 ? static_cast<double>(h - 1) / (out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(w - 1) / (out_w - 1) : 0.0;
  for (int oy = 0; oy < out_h; ++oy) {
    const double fy = oy * sy;
    const Eigen::Index y0 = static_cast<Eigen::Index>(std::floor(fy));
    const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, h - 1);
    const double wy = fy - static_cast<double>(y0);
    for (int ox = 0; ox < out_w; ++ox) {
      const double fx = ox * sx;
      const Eigen::Index x0 = static_cast<Eigen::Index>(std::floor(fx));
      const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, w - 1);
      const double wx = fx - static_cast<double>(x0);
      const double v = (1 - wy) * ((1 - wx) * img(y0, x0) + wx * img(y0, x1)) +
                       wy * ((1 - wx) * img(y1, x0) + wx * img(y1, x1));
      out(oy, ox) = static_cast<float>(v);
    }
  }
  return out;
}

Grayscale preprocess_image(const Grayscale& img) {
  if (img.rows() < 2 || img.cols() < 2)
    throw DataError("preprocess_image: image must be at least 2x2");
  return resize_bilinear(dilate_dark3x3(img), kModelImageSize, kModelImageSize);
}

}  // namespace gfte
