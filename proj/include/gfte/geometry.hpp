#pragma once

#include <cmath>

namespace gfte {

// Axis-aligned box in source coordinates. Origin is top-left, y grows downward;
// loaders normalize PDF-style inputs into this convention.
struct BBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double cx() const { return 0.5 * (x0 + x1); }
  double cy() const { return 0.5 * (y0 + y1); }

  bool finite() const {
    return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) && std::isfinite(y1);
  }
  bool positive_area() const { return finite() && x0 < x1 && y0 < y1; }
  bool contains(const BBox& inner) const {
    return inner.x0 >= x0 && inner.y0 >= y0 && inner.x1 <= x1 && inner.y1 <= y1;
  }
};

inline bool operator==(const BBox& a, const BBox& b) {
  return a.x0 == b.x0 && a.y0 == b.y0 && a.x1 == b.x1 && a.y1 == b.y1;
}

}  // namespace gfte
