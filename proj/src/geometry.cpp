#include "soctrack/geometry.hpp"

#include <algorithm>

namespace soctrack {

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double iy = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

double center_distance(const BBox& a, const BBox& b) {
  const Point ca = a.center();
  const Point cb = b.center();
  return std::hypot(ca.x - cb.x, ca.y - cb.y);
}

}  // namespace soctrack
