#pragma once

#include <cmath>
#include <stdexcept>

namespace soctrack {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Axis-aligned box in image coordinates (origin top-left, y growing down),
// stored in corner form. Zero- or negative-area boxes are rejected at
// construction, so downstream code never checks.
class BBox {
 public:
  BBox(double x_min, double y_min, double x_max, double y_max)
      : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
    if (!(std::isfinite(x_min) && std::isfinite(y_min) &&
          std::isfinite(x_max) && std::isfinite(y_max))) {
      throw std::invalid_argument("BBox: coordinates must be finite");
    }
    if (!(x_min < x_max && y_min < y_max)) {
      throw std::invalid_argument("BBox: requires x_min < x_max and y_min < y_max");
    }
  }

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }

  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double area() const { return width() * height(); }

  Point center() const {
    return {(x_min_ + x_max_) * 0.5, (y_min_ + y_max_) * 0.5};
  }

  // Translated copy.
  BBox shifted(double dx, double dy) const {
    return BBox(x_min_ + dx, y_min_ + dy, x_max_ + dx, y_max_ + dy);
  }

 private:
  double x_min_, y_min_, x_max_, y_max_;
};

// Intersection over union; 0 when disjoint, 1 only for identical boxes.
double iou(const BBox& a, const BBox& b);

inline Point center(const BBox& b) { return b.center(); }

// Euclidean distance between box centers.
double center_distance(const BBox& a, const BBox& b);

}  // namespace soctrack
