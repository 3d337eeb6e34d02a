#include "soctrack/field_mask.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "soctrack/errors.hpp"

namespace soctrack {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 8-neighborhood, clockwise on screen (y grows down), starting East.
constexpr std::array<int, 8> kDx8 = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy8 = {0, 1, 1, 1, 0, -1, -1, -1};

struct Labeling {
  std::vector<int> labels;  // 0 = unset, components numbered from 1
  std::vector<std::size_t> sizes;  // sizes[k] = pixel count of component k+1
};

Labeling label_components(const FieldMask& mask) {
  const int w = mask.width(), h = mask.height();
  Labeling out;
  out.labels.assign(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::pair<int, int>> stack;
  int next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!mask.test(x, y) || out.labels[idx] != 0) continue;
      ++next;
      std::size_t size = 0;
      stack.push_back({x, y});
      out.labels[idx] = next;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++size;
        const int nx4[4] = {cx + 1, cx - 1, cx, cx};
        const int ny4[4] = {cy, cy, cy + 1, cy - 1};
        for (int k = 0; k < 4; ++k) {
          const int nx = nx4[k], ny = ny4[k];
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
          if (!mask.test(nx, ny) || out.labels[nidx] != 0) continue;
          out.labels[nidx] = next;
          stack.push_back({nx, ny});
        }
      }
      out.sizes.push_back(size);
    }
  }
  return out;
}

// Moore-neighbor boundary trace of the component containing `start`, which
// must be its first pixel in row-major order. Returns the closed sequence of
// boundary pixel coordinates.
std::vector<std::pair<int, int>> trace_boundary(const FieldMask& mask,
                                                std::pair<int, int> start) {
  std::vector<std::pair<int, int>> boundary;
  boundary.push_back(start);

  auto is_set = [&](int x, int y) {
    return x >= 0 && x < mask.width() && y >= 0 && y < mask.height() &&
           mask.test(x, y);
  };

  // Backtrack starts West of the first pixel, which is outside the component
  // by choice of start.
  std::pair<int, int> cur = start;
  int back_dir = 4;  // direction from cur toward the backtrack pixel
  const std::pair<int, int> start_pos = start;
  const int start_back = back_dir;

  const std::size_t cap = 4 * (static_cast<std::size_t>(mask.width()) * mask.height() + 1);
  for (std::size_t step = 0; step < cap; ++step) {
    int found = -1;
    // Scan clockwise beginning just after the backtrack direction.
    for (int k = 1; k <= 8; ++k) {
      const int d = (back_dir + k) % 8;
      if (is_set(cur.first + kDx8[d], cur.second + kDy8[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) return boundary;  // isolated pixel
    const std::pair<int, int> next = {cur.first + kDx8[found],
                                      cur.second + kDy8[found]};
    // New backtrack: the neighbor checked just before the hit, seen from next.
    const int prev_checked = (found + 7) % 8;
    const std::pair<int, int> back_px = {cur.first + kDx8[prev_checked],
                                         cur.second + kDy8[prev_checked]};
    cur = next;
    back_dir = -1;
    for (int d = 0; d < 8; ++d) {
      if (cur.first + kDx8[d] == back_px.first &&
          cur.second + kDy8[d] == back_px.second) {
        back_dir = d;
        break;
      }
    }
    if (cur == start_pos && back_dir == start_back) break;  // closed the loop
    boundary.push_back(cur);
  }
  return boundary;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
  double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

// Douglas-Peucker over an open chain with fixed endpoints.
std::vector<Point> dp_chain(const std::vector<Point>& pts, double eps) {
  if (pts.size() <= 2) return pts;
  std::vector<char> keep(pts.size(), 0);
  keep.front() = keep.back() = 1;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, pts.size() - 1}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    if (j <= i + 1) continue;
    double worst = -1.0;
    std::size_t worst_k = i;
    for (std::size_t k = i + 1; k < j; ++k) {
      const double d = point_segment_distance(pts[k], pts[i], pts[j]);
      if (d > worst) {
        worst = d;
        worst_k = k;
      }
    }
    if (worst > eps) {
      keep[worst_k] = 1;
      stack.push_back({i, worst_k});
      stack.push_back({worst_k, j});
    }
  }
  std::vector<Point> out;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (keep[k]) out.push_back(pts[k]);
  }
  return out;
}

Polygon bounding_rect_polygon(const FieldMask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  Polygon poly;
  poly.vertices = {{static_cast<double>(x0), static_cast<double>(y0)},
                   {static_cast<double>(x1 + 1), static_cast<double>(y0)},
                   {static_cast<double>(x1 + 1), static_cast<double>(y1 + 1)},
                   {static_cast<double>(x0), static_cast<double>(y1 + 1)}};
  return poly;
}

}  // namespace

std::size_t FieldMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; }));
}

FieldMask green_mask(const Image& img, const HsvRange& range) {
  FieldMask out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Hsv hsv = rgb_to_hsv(img.at(x, y), range.scale);
      const bool in = hsv.h >= range.lower.h && hsv.h <= range.upper.h &&
                      hsv.s >= range.lower.s && hsv.s <= range.upper.s &&
                      hsv.v >= range.lower.v && hsv.v <= range.upper.v;
      if (in) out.set(x, y, true);
    }
  }
  return out;
}

FieldMask largest_component(const FieldMask& mask) {
  FieldMask out(mask.width(), mask.height());
  const Labeling lab = label_components(mask);
  if (lab.sizes.empty()) return out;
  int best = 0;
  for (std::size_t k = 1; k < lab.sizes.size(); ++k) {
    if (lab.sizes[k] > lab.sizes[best]) best = static_cast<int>(k);
  }
  const int want = best + 1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (lab.labels[static_cast<std::size_t>(y) * mask.width() + x] == want) {
        out.set(x, y, true);
      }
    }
  }
  return out;
}

Polygon approx_polygon(const FieldMask& mask, double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("approx_polygon: epsilon must be >= 0");
  const FieldMask comp = largest_component(mask);
  std::pair<int, int> start{-1, -1};
  for (int y = 0; y < comp.height() && start.first < 0; ++y) {
    for (int x = 0; x < comp.width(); ++x) {
      if (comp.test(x, y)) {
        start = {x, y};
        break;
      }
    }
  }
  if (start.first < 0) throw EmptyMaskError("approx_polygon: mask has no set pixel");

  const auto px = trace_boundary(comp, start);
  std::vector<Point> ring(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    ring[i] = {px[i].first + 0.5, px[i].second + 0.5};  // pixel centers
  }
  if (ring.size() < 3) return bounding_rect_polygon(comp);

  // Split the closed ring at two far-apart anchors so each half is an open
  // chain with stable endpoints, then simplify the halves independently.
  const std::size_t n = ring.size();
  auto farthest_from = [&](std::size_t i) {
    std::size_t best = 0;
    double bd = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = std::hypot(ring[k].x - ring[i].x, ring[k].y - ring[i].y);
      if (d > bd) {
        bd = d;
        best = k;
      }
    }
    return best;
  };
  const std::size_t a = farthest_from(0);
  const std::size_t b = farthest_from(a);
  const std::size_t lo = std::min(a, b), hi = std::max(a, b);

  std::vector<Point> chain1(ring.begin() + lo, ring.begin() + hi + 1);
  std::vector<Point> chain2;
  for (std::size_t k = hi; k < n; ++k) chain2.push_back(ring[k]);
  for (std::size_t k = 0; k <= lo; ++k) chain2.push_back(ring[k]);

  const std::vector<Point> s1 = dp_chain(chain1, epsilon);
  const std::vector<Point> s2 = dp_chain(chain2, epsilon);

  Polygon poly;
  poly.vertices.insert(poly.vertices.end(), s1.begin(), s1.end());
  poly.vertices.insert(poly.vertices.end(), s2.begin() + 1, s2.end() - 1);
  if (poly.vertices.size() < 3) return bounding_rect_polygon(comp);
  return poly;
}

FieldMask fill_polygon(int width, int height, const Polygon& poly) {
  FieldMask out(width, height);
  const auto& v = poly.vertices;
  if (v.size() < 3) return out;
  const std::size_t n = v.size();

  // Interior: even-odd parity against pixel centers, edges half-open in y so
  // shared vertices are counted once.
  for (int y = 0; y < height; ++y) {
    const double yc = y + 0.5;
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = v[i];
      const Point& q = v[(i + 1) % n];
      if (p.y == q.y) continue;
      const bool crosses = (p.y <= yc && yc < q.y) || (q.y <= yc && yc < p.y);
      if (!crosses) continue;
      xs.push_back(p.x + (yc - p.y) * (q.x - p.x) / (q.y - p.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      const int x_first = static_cast<int>(std::ceil(xs[i] - 0.5));
      const int x_last = static_cast<int>(std::ceil(xs[i + 1] - 0.5)) - 1;
      for (int x = std::max(0, x_first); x <= std::min(width - 1, x_last); ++x) {
        out.set(x, y, true);
      }
    }
  }

  // Outline: walk each edge so boundary pixels are part of the fill.
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = v[i];
    const Point& q = v[(i + 1) % n];
    const double dx = q.x - p.x, dy = q.y - p.y;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))));
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const int x = static_cast<int>(std::floor(p.x + t * dx));
      const int y = static_cast<int>(std::floor(p.y + t * dy));
      if (x >= 0 && x < width && y >= 0 && y < height) out.set(x, y, true);
    }
  }
  return out;
}

FieldMask bottom_line_cut(const FieldMask& mask, const FieldMask& line_mask,
                          const LineCutConfig& cfg) {
  if (mask.width() != line_mask.width() || mask.height() != line_mask.height()) {
    throw std::invalid_argument("bottom_line_cut: mask dimensions differ");
  }
  const int w = mask.width(), h = mask.height();
  const double deg = kPi / 180.0;

  std::vector<double> phis;  // line slope angle, from horizontal
  for (double a = -cfg.max_angle_deg; a <= cfg.max_angle_deg + 1e-9;
       a += cfg.angle_step_deg) {
    phis.push_back(a * deg);
  }

  // rho = xc*cos(theta) + yc*sin(theta) with theta = phi + 90deg; for
  // |phi| <= 30deg this stays within [-w/2, w/2 + h].
  const double rho_off = 0.5 * w + 2.0;
  const int nbins = w + h + 8;
  std::vector<int> acc(phis.size() * static_cast<std::size_t>(nbins), 0);
  std::vector<double> cos_t(phis.size()), sin_t(phis.size());
  for (std::size_t p = 0; p < phis.size(); ++p) {
    cos_t[p] = std::cos(phis[p] + kPi / 2.0);
    sin_t[p] = std::sin(phis[p] + kPi / 2.0);
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!line_mask.test(x, y)) continue;
      const double xc = x + 0.5, yc = y + 0.5;
      for (std::size_t p = 0; p < phis.size(); ++p) {
        const double rho = xc * cos_t[p] + yc * sin_t[p];
        const int bin = static_cast<int>(std::lround(rho + rho_off));
        if (bin >= 0 && bin < nbins) {
          ++acc[p * static_cast<std::size_t>(nbins) + bin];
        }
      }
    }
  }

  const double min_len = cfg.min_len_frac * w;
  const int vote_floor = std::max(8, static_cast<int>(min_len * 0.5));

  bool found = false;
  double best_mid_y = -1.0;
  double best_cos = 0.0, best_sin = 1.0, best_rho = 0.0;

  std::vector<char> hit(static_cast<std::size_t>(w));
  for (std::size_t p = 0; p < phis.size(); ++p) {
    for (int bin = 0; bin < nbins; ++bin) {
      if (acc[p * static_cast<std::size_t>(nbins) + bin] < vote_floor) continue;
      const double rho = bin - rho_off;
      // Mark columns where a line-mask pixel sits within band_px of the line.
      std::fill(hit.begin(), hit.end(), 0);
      for (int x = 0; x < w; ++x) {
        const double xc = x + 0.5;
        const double y_line = (rho - xc * cos_t[p]) / sin_t[p];
        const int y_lo = std::max(0, static_cast<int>(std::floor(y_line - cfg.band_px - 0.5)));
        const int y_hi = std::min(h - 1, static_cast<int>(std::ceil(y_line + cfg.band_px - 0.5)));
        for (int y = y_lo; y <= y_hi; ++y) {
          if (line_mask.test(x, y) && std::abs(y + 0.5 - y_line) <= cfg.band_px) {
            hit[static_cast<std::size_t>(x)] = 1;
            break;
          }
        }
      }
      // Longest run of hit columns, tolerating short gaps.
      int run_a = -1, last_hit = -1, best_a = -1, best_b = -2;
      for (int x = 0; x < w; ++x) {
        if (!hit[static_cast<std::size_t>(x)]) continue;
        if (run_a < 0 || x - last_hit - 1 > cfg.max_gap_px) run_a = x;
        last_hit = x;
        if (last_hit - run_a > best_b - best_a) {
          best_a = run_a;
          best_b = last_hit;
        }
      }
      if (best_a < 0) continue;
      // sin(theta) = cos(phi), the run's horizontal extent over cos(phi) is
      // its length along the line.
      const double seg_len = (best_b - best_a + 1) / std::max(sin_t[p], 1e-9);
      if (seg_len < min_len) continue;
      const double mid_x = 0.5 * (best_a + best_b) + 0.5;
      const double mid_y = (rho - mid_x * cos_t[p]) / sin_t[p];
      if (mid_y < (1.0 - cfg.bottom_frac) * h || mid_y >= h) continue;
      if (!found || mid_y > best_mid_y) {
        found = true;
        best_mid_y = mid_y;
        best_cos = cos_t[p];
        best_sin = sin_t[p];
        best_rho = rho;
      }
    }
  }

  if (!found) return mask;
  FieldMask out = mask;
  for (int x = 0; x < w; ++x) {
    const double y_line = (best_rho - (x + 0.5) * best_cos) / best_sin;
    const int y_start = static_cast<int>(std::floor(y_line - 0.5)) + 1;
    for (int y = std::max(0, y_start); y < h; ++y) out.set(x, y, false);
  }
  return out;
}

namespace {

FieldMask fallback_line_mask(const Image& img, const FieldMask& component,
                             const FieldMaskConfig& cfg) {
  int x0 = img.width(), y0 = img.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!component.test(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  FieldMask out(img.width(), img.height());
  for (int y = std::max(0, y0); y <= std::min(img.height() - 1, y1); ++y) {
    for (int x = std::max(0, x0); x <= std::min(img.width() - 1, x1); ++x) {
      const Hsv hsv = rgb_to_hsv(img.at(x, y), cfg.green.scale);
      if (hsv.s <= cfg.fallback_max_sat && hsv.v >= cfg.fallback_min_val) {
        out.set(x, y, true);
      }
    }
  }
  return out;
}

}  // namespace

FieldMask compute_field_mask(const Image& img, const FieldMask* line_mask,
                             const FieldMaskConfig& cfg) {
  const FieldMask g = green_mask(img, cfg.green);
  const FieldMask comp = largest_component(g);
  if (comp.none()) throw EmptyMaskError("compute_field_mask: no green component");
  const double diag = std::hypot(img.width(), img.height());
  const Polygon poly = approx_polygon(comp, cfg.epsilon_frac * diag);
  FieldMask filled = fill_polygon(img.width(), img.height(), poly);
  if (line_mask) return bottom_line_cut(filled, *line_mask, cfg.line);
  if (cfg.line_fallback) {
    return bottom_line_cut(filled, fallback_line_mask(img, comp, cfg), cfg.line);
  }
  return filled;
}

double field_overlap(const BBox& box, const FieldMask& mask) {
  const int x_first = std::max(0, static_cast<int>(std::ceil(box.x_min() - 0.5)));
  const int x_last = std::min(mask.width() - 1,
                              static_cast<int>(std::ceil(box.x_max() - 0.5)) - 1);
  const int y_first = std::max(0, static_cast<int>(std::ceil(box.y_min() - 0.5)));
  const int y_last = std::min(mask.height() - 1,
                              static_cast<int>(std::ceil(box.y_max() - 0.5)) - 1);
  std::size_t total = 0, set = 0;
  for (int y = y_first; y <= y_last; ++y) {
    for (int x = x_first; x <= x_last; ++x) {
      ++total;
      if (mask.test(x, y)) ++set;
    }
  }
  if (total == 0) return 0.0;
  return static_cast<double>(set) / static_cast<double>(total);
}

FrameDetections filter_by_field(const FrameDetections& dets, const FieldMask& mask,
                                double min_overlap) {
  FrameDetections out(dets.frame());
  for (const auto& d : dets.items()) {
    if (field_overlap(d.bbox(), mask) >= min_overlap) out.add(d);
  }
  return out;
}

FieldMask load_mask(const std::string& path) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (mat.empty()) throw ParseError("load_mask: cannot read " + path);
  FieldMask out(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      if (row[x] != 0) out.set(x, y, true);
    }
  }
  return out;
}

void save_mask(const std::string& path, const FieldMask& mask) {
  cv::Mat mat(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = mask.test(x, y) ? 255 : 0;
  }
  if (!cv::imwrite(path, mat)) throw ParseError("save_mask: cannot write " + path);
}

}  // namespace soctrack
