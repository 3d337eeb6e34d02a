#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace soctrack {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb& o) const { return r == o.r && g == o.g && b == o.b; }
};

// Owned RGB raster, row-major, origin top-left.
class Image {
 public:
  Image(int width, int height, Rgb fill = Rgb{})
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw std::invalid_argument("Image: dimensions must be positive");
    }
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }

  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  const Rgb& at(int x, int y) const {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }

  bool contains(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  std::vector<Rgb>& pixels() { return pixels_; }
  const std::vector<Rgb>& pixels() const { return pixels_; }

 private:
  int width_, height_;
  std::vector<Rgb> pixels_;
};

// Hue is reported on the half-degree scale [0,180) by default, matching the
// 8-bit convention most pipelines use; kDeg360 gives whole degrees [0,360).
// Saturation and value are always [0,255].
enum class HueScale { kDeg180, kDeg360 };

struct Hsv {
  int h = 0;
  int s = 0;
  int v = 0;
};

Hsv rgb_to_hsv(const Rgb& c, HueScale scale = HueScale::kDeg180);
Rgb hsv_to_rgb(int h, int s, int v, HueScale scale = HueScale::kDeg180);

// PNG/JPEG file I/O. Failures raise ParseError.
Image load_image(const std::string& path);
void save_image(const std::string& path, const Image& img);

}  // namespace soctrack
