#include "soctrack/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "soctrack/errors.hpp"

namespace soctrack {

Hsv rgb_to_hsv(const Rgb& c, HueScale scale) {
  const int r = c.r, g = c.g, b = c.b;
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int delta = mx - mn;

  Hsv out;
  out.v = mx;
  out.s = (mx == 0) ? 0 : static_cast<int>(std::lround(255.0 * delta / mx));

  double hue = 0.0;
  if (delta != 0) {
    if (mx == r) {
      hue = 60.0 * (g - b) / delta;
    } else if (mx == g) {
      hue = 120.0 + 60.0 * (b - r) / delta;
    } else {
      hue = 240.0 + 60.0 * (r - g) / delta;
    }
    if (hue < 0.0) hue += 360.0;
  }
  if (scale == HueScale::kDeg180) {
    out.h = static_cast<int>(std::lround(hue / 2.0)) % 180;
  } else {
    out.h = static_cast<int>(std::lround(hue)) % 360;
  }
  return out;
}

Rgb hsv_to_rgb(int h, int s, int v, HueScale scale) {
  const double hue_deg = (scale == HueScale::kDeg180) ? 2.0 * h : 1.0 * h;
  const double sf = s / 255.0;
  const double vf = v / 255.0;
  const double c = vf * sf;
  const double hp = hue_deg / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1)      { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else             { r = c; b = x; }
  const double m = vf - c;
  auto to8 = [](double f) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(f * 255.0), 0L, 255L));
  };
  return Rgb{to8(r + m), to8(g + m), to8(b + m)};
}

Image load_image(const std::string& path) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_COLOR);
  if (mat.empty()) throw ParseError("load_image: cannot read " + path);
  Image img(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const cv::Vec3b* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mat.cols; ++x) {
      img.at(x, y) = Rgb{row[x][2], row[x][1], row[x][0]};  // BGR on disk
    }
  }
  return img;
}

void save_image(const std::string& path, const Image& img) {
  cv::Mat mat(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    cv::Vec3b* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      const Rgb& p = img.at(x, y);
      row[x] = cv::Vec3b(p.b, p.g, p.r);
    }
  }
  if (!cv::imwrite(path, mat)) throw ParseError("save_image: cannot write " + path);
}

}  // namespace soctrack
