#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soctrack/detections.hpp"
#include "soctrack/geometry.hpp"
#include "soctrack/image.hpp"

namespace soctrack {

// Binary raster aligned with an Image. Set bits mark playing-field pixels.
class FieldMask {
 public:
  FieldMask(int width, int height, bool fill = false)
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw std::invalid_argument("FieldMask: dimensions must be positive");
    }
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }

  bool test(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool on) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0;
  }

  std::size_t count() const;
  bool none() const { return count() == 0; }

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::vector<std::uint8_t>& bits() { return bits_; }

 private:
  int width_, height_;
  std::vector<std::uint8_t> bits_;
};

struct Polygon {
  std::vector<Point> vertices;  // closed implicitly, last connects to first
};

struct HsvRange {
  Hsv lower{15, 50, 50};
  Hsv upper{70, 255, 255};
  HueScale scale = HueScale::kDeg180;
};

// Pixels whose HSV falls inside the range (hue wrap is not needed for grass
// tones, so lower.h <= h <= upper.h is a plain interval test).
FieldMask green_mask(const Image& img, const HsvRange& range = {});

// Largest 4-connected component of set pixels; ties resolved toward the
// component discovered first in row-major order. Empty input gives an empty
// mask.
FieldMask largest_component(const FieldMask& mask);

// Douglas-Peucker simplification of the outer boundary of the largest
// component. epsilon is the tolerance in pixels. Throws EmptyMaskError when
// no pixel is set.
Polygon approx_polygon(const FieldMask& mask, double epsilon);

// Rasterizes the polygon: interior by even-odd scanline parity at pixel
// centers, plus the traced outline so boundary pixels are covered.
FieldMask fill_polygon(int width, int height, const Polygon& poly);

struct LineCutConfig {
  double max_angle_deg = 30.0;   // slope gate, measured from horizontal
  double bottom_frac = 0.4;      // segment midpoint must sit this far down
  double min_len_frac = 0.3;     // of image width
  double angle_step_deg = 1.0;
  double band_px = 1.5;          // distance from the line still voting for it
  int max_gap_px = 3;            // tolerated hole inside one segment
};

// Finds near-horizontal segments in line_mask via a Hough transform, keeps
// those long enough and low enough in the frame, and clears every mask bit
// strictly below the lowest one. Without a qualifying segment the mask is
// returned unchanged.
FieldMask bottom_line_cut(const FieldMask& mask, const FieldMask& line_mask,
                          const LineCutConfig& cfg = {});

struct FieldMaskConfig {
  HsvRange green;
  double epsilon_frac = 0.01;  // of the image diagonal
  LineCutConfig line;
  // When no separate line mask is given, optionally derive one from bright
  // low-saturation pixels inside the green region's bounding box. Off by
  // default; the heuristic is a stand-in for a real line detector.
  bool line_fallback = false;
  int fallback_max_sat = 60;
  int fallback_min_val = 200;
};

// Full pipeline: green threshold, largest component, polygon approximation
// with epsilon = epsilon_frac * diagonal, fill, optional bottom-line cut.
FieldMask compute_field_mask(const Image& img, const FieldMask* line_mask = nullptr,
                             const FieldMaskConfig& cfg = {});

// Fraction of the box-covered pixels (centers inside the box, clipped to the
// mask extent) that are set. A box entirely outside the image gives 0.
double field_overlap(const BBox& box, const FieldMask& mask);

// Keeps detections with field_overlap of at least min_overlap; order preserved.
FrameDetections filter_by_field(const FrameDetections& dets, const FieldMask& mask,
                                double min_overlap = 0.3);

// Single-channel PNG I/O; any nonzero pixel loads as a set bit.
FieldMask load_mask(const std::string& path);
void save_mask(const std::string& path, const FieldMask& mask);

}  // namespace soctrack
