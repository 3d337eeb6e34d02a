#include "soctrack/pseudo_label.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "soctrack/errors.hpp"

namespace soctrack {

namespace {

struct PixelWindow {
  int x0, x1, y0, y1;  // inclusive pixel ranges, empty when x0 > x1
};

PixelWindow window_for(const BBox& box, int width, int height) {
  PixelWindow w;
  w.x0 = std::max(0, static_cast<int>(std::ceil(box.x_min() - 0.5)));
  w.x1 = std::min(width - 1, static_cast<int>(std::ceil(box.x_max() - 0.5)) - 1);
  w.y0 = std::max(0, static_cast<int>(std::ceil(box.y_min() - 0.5)));
  w.y1 = std::min(height - 1, static_cast<int>(std::ceil(box.y_max() - 0.5)) - 1);
  return w;
}

bool is_green(const Image& img, int x, int y, const HsvRange& range) {
  const Hsv hsv = rgb_to_hsv(img.at(x, y), range.scale);
  return hsv.h >= range.lower.h && hsv.h <= range.upper.h &&
         hsv.s >= range.lower.s && hsv.s <= range.upper.s &&
         hsv.v >= range.lower.v && hsv.v <= range.upper.v;
}

}  // namespace

bool HeuristicVerifier::verify(int, const Image& img, const BBox& box) const {
  return verify_candidate(img, box, cfg_);
}

bool verify_candidate(const Image& img, const BBox& box,
                      const PseudoLabelConfig& cfg) {
  const double aspect = box.height() / box.width();
  if (aspect < cfg.min_aspect || aspect > cfg.max_aspect) return false;

  const PixelWindow w = window_for(box, img.width(), img.height());
  if (w.x0 > w.x1 || w.y0 > w.y1) return false;
  std::size_t total = 0, nongreen = 0;
  for (int y = w.y0; y <= w.y1; ++y) {
    for (int x = w.x0; x <= w.x1; ++x) {
      ++total;
      if (!is_green(img, x, y, cfg.green)) ++nongreen;
    }
  }
  return static_cast<double>(nongreen) / static_cast<double>(total) >=
         cfg.min_nongreen_frac;
}

VerdictFileVerifier::VerdictFileVerifier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("VerdictFileVerifier: cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("VerdictFileVerifier: line " + std::to_string(line_no));
      }
    }
    if (vals.size() != 6) {
      throw ParseError("VerdictFileVerifier: line " + std::to_string(line_no) +
                       ": expected frame,x_min,y_min,x_max,y_max,verdict");
    }
    rows_[static_cast<int>(vals[0])].push_back(
        Row{vals[1], vals[2], vals[3], vals[4], vals[5] != 0.0});
  }
}

bool VerdictFileVerifier::verify(int frame, const Image&, const BBox& box) const {
  const auto it = rows_.find(frame);
  if (it == rows_.end()) return false;
  constexpr double kTol = 0.5;
  for (const Row& r : it->second) {
    if (std::abs(r.x_min - box.x_min()) <= kTol &&
        std::abs(r.y_min - box.y_min()) <= kTol &&
        std::abs(r.x_max - box.x_max()) <= kTol &&
        std::abs(r.y_max - box.y_max()) <= kTol) {
      return r.verdict;
    }
  }
  return false;
}

std::vector<BBox> detect_missed_players(const Image& img, const FieldMask& mask,
                                        const std::vector<BBox>& existing,
                                        const PseudoLabelConfig& cfg,
                                        const Verifier& verifier, int frame) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    throw std::invalid_argument("detect_missed_players: image/mask size mismatch");
  }

  // Area window from the median existing box, absolute window otherwise.
  double area_lo = cfg.abs_area_lo, area_hi = cfg.abs_area_hi;
  if (!existing.empty()) {
    std::vector<double> areas;
    areas.reserve(existing.size());
    for (const BBox& b : existing) areas.push_back(b.area());
    std::sort(areas.begin(), areas.end());
    const double median = areas[areas.size() / 2];
    area_lo = cfg.blob_area_lo * median;
    area_hi = cfg.blob_area_hi * median;
  }

  // Non-green pixels inside the mask, grouped into 4-connected blobs.
  FieldMask cand(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (mask.test(x, y) && !is_green(img, x, y, cfg.green)) cand.set(x, y, true);
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(img.width()) * img.height(), 0);
  std::vector<BBox> out;
  std::vector<std::pair<int, int>> stack;
  int next_label = 0;
  for (int sy = 0; sy < img.height(); ++sy) {
    for (int sx = 0; sx < img.width(); ++sx) {
      const std::size_t sidx = static_cast<std::size_t>(sy) * img.width() + sx;
      if (!cand.test(sx, sy) || labels[sidx] != 0) continue;
      ++next_label;
      labels[sidx] = next_label;
      stack.push_back({sx, sy});
      int x0 = sx, x1 = sx, y0 = sy, y1 = sy;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        x0 = std::min(x0, cx);
        x1 = std::max(x1, cx);
        y0 = std::min(y0, cy);
        y1 = std::max(y1, cy);
        const int nx4[4] = {cx + 1, cx - 1, cx, cx};
        const int ny4[4] = {cy, cy, cy + 1, cy - 1};
        for (int k = 0; k < 4; ++k) {
          const int nx = nx4[k], ny = ny4[k];
          if (nx < 0 || nx >= img.width() || ny < 0 || ny >= img.height()) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * img.width() + nx;
          if (!cand.test(nx, ny) || labels[nidx] != 0) continue;
          labels[nidx] = next_label;
          stack.push_back({nx, ny});
        }
      }

      // Enclosing box in pixel-edge coordinates.
      const BBox blob(x0, y0, x1 + 1, y1 + 1);
      const double area = blob.area();
      if (area < area_lo || area > area_hi) continue;
      bool clashes = false;
      for (const BBox& e : existing) {
        if (iou(blob, e) >= cfg.max_existing_iou) {
          clashes = true;
          break;
        }
      }
      if (clashes) continue;
      if (!verifier.verify(frame, img, blob)) continue;
      out.push_back(blob);
    }
  }
  return out;
}

std::vector<LabeledBox> correct_annotations(const FrameDetections& dets,
                                            const Image& img, const FieldMask& mask,
                                            const PseudoLabelConfig& cfg,
                                            const Verifier& verifier) {
  const FrameDetections confident = filter_by_confidence(dets, cfg.sigma);
  const FrameDetections on_field =
      filter_by_field(confident, mask, cfg.min_field_overlap);

  std::vector<LabeledBox> out;
  std::vector<BBox> existing;
  for (const auto& d : on_field.items()) {
    out.push_back(LabeledBox{d.bbox(), LabelSource::kTeacher});
    existing.push_back(d.bbox());
  }
  const std::vector<BBox> recovered =
      detect_missed_players(img, mask, existing, cfg, verifier, dets.frame());
  for (const BBox& b : recovered) out.push_back(LabeledBox{b, LabelSource::kBlob});
  return out;
}

std::vector<Track> generate_reid_tracks(const std::vector<FrameDetections>& frames,
                                        double tau_iou, int min_len) {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].frame() <= frames[i - 1].frame()) {
      throw std::invalid_argument("generate_reid_tracks: frames must be strictly increasing");
    }
  }

  std::vector<Track> open, closed;
  TrackId next_id = 1;
  for (const FrameDetections& fd : frames) {
    std::vector<BBox> prev;
    prev.reserve(open.size());
    for (const Track& t : open) prev.push_back(t.last().bbox);
    std::vector<BBox> cur;
    cur.reserve(fd.size());
    for (const auto& d : fd.items()) cur.push_back(d.bbox());

    const SpatialResult res = spatial_associate(prev, cur, tau_iou);

    std::vector<Track> next_open;
    for (const auto& [pi, cj] : res.matches) {
      Track& t = open[pi];
      t.entries.push_back(TrackEntry{fd.frame(), cur[cj], std::nullopt});
      next_open.push_back(std::move(t));
    }
    for (std::size_t pi : res.lost) closed.push_back(std::move(open[pi]));
    for (std::size_t cj : res.leftovers) {
      Track t;
      t.id = next_id++;
      t.entries.push_back(TrackEntry{fd.frame(), cur[cj], std::nullopt});
      next_open.push_back(std::move(t));
    }
    std::sort(next_open.begin(), next_open.end(),
              [](const Track& a, const Track& b) { return a.id < b.id; });
    open = std::move(next_open);
  }
  for (Track& t : open) closed.push_back(std::move(t));

  std::vector<Track> out;
  for (Track& t : closed) {
    if (t.length() > static_cast<std::size_t>(min_len)) out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(),
            [](const Track& a, const Track& b) { return a.id < b.id; });
  return out;
}

ReidBatch sample_triplet_batch(const std::vector<Track>& tracks, std::size_t k,
                               std::size_t t, Rng& rng) {
  if (k < 2 || t < 1) {
    throw std::invalid_argument("sample_triplet_batch: need k >= 2 and t >= 1");
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].length() >= t) eligible.push_back(i);
  }
  if (eligible.size() < k) {
    throw InsufficientTracksError("sample_triplet_batch: " +
                                  std::to_string(eligible.size()) + " usable tracks, need " +
                                  std::to_string(k));
  }

  // Partial Fisher-Yates; the first k slots are the chosen tracks.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }

  ReidBatch batch;
  batch.k_count = k;
  batch.t_count = t;
  for (std::size_t i = 0; i < k; ++i) {
    const Track& track = tracks[eligible[i]];
    std::vector<std::size_t> idx(track.length());
    for (std::size_t n = 0; n < idx.size(); ++n) idx[n] = n;
    for (std::size_t n = 0; n < t; ++n) {
      const std::size_t j = n + static_cast<std::size_t>(rng.uniform_index(idx.size() - n));
      std::swap(idx[n], idx[j]);
    }
    std::vector<std::size_t> chosen(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(t));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t n : chosen) {
      batch.samples.push_back(
          ReidSample{track.id, track.entries[n].frame, track.entries[n].bbox});
    }
  }
  return batch;
}

AugmentResult rescale_pad(const Image& img, const std::vector<BBox>& boxes,
                          double scale, int anchor_x, int anchor_y) {
  if (!(scale > 0.0 && scale <= 1.0)) {
    throw std::invalid_argument("rescale_pad: scale must be in (0,1]");
  }
  const int sw = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
  const int sh = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
  if (anchor_x < 0 || anchor_y < 0 || anchor_x + sw > img.width() ||
      anchor_y + sh > img.height()) {
    throw std::invalid_argument("rescale_pad: anchor puts content outside the canvas");
  }

  AugmentResult out{Image(img.width(), img.height(), Rgb{0, 0, 0}), {}, scale};

  // Bilinear resample into the top-left sw x sh block, then shift by anchor.
  const double fx = static_cast<double>(img.width()) / sw;
  const double fy = static_cast<double>(img.height()) / sh;
  for (int y = 0; y < sh; ++y) {
    for (int x = 0; x < sw; ++x) {
      const double sx = (x + 0.5) * fx - 0.5;
      const double sy = (y + 0.5) * fy - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, img.width() - 1);
      const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, img.height() - 1);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const int y1 = std::min(y0 + 1, img.height() - 1);
      const double ax = std::clamp(sx - x0, 0.0, 1.0);
      const double ay = std::clamp(sy - y0, 0.0, 1.0);
      const Rgb p00 = img.at(x0, y0), p10 = img.at(x1, y0);
      const Rgb p01 = img.at(x0, y1), p11 = img.at(x1, y1);
      auto mix = [&](std::uint8_t c00, std::uint8_t c10, std::uint8_t c01,
                     std::uint8_t c11) {
        const double v = (1 - ay) * ((1 - ax) * c00 + ax * c10) +
                         ay * ((1 - ax) * c01 + ax * c11);
        return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      };
      out.image.at(x + anchor_x, y + anchor_y) =
          Rgb{mix(p00.r, p10.r, p01.r, p11.r), mix(p00.g, p10.g, p01.g, p11.g),
              mix(p00.b, p10.b, p01.b, p11.b)};
    }
  }

  for (const BBox& b : boxes) {
    out.boxes.push_back(BBox(b.x_min() * scale + anchor_x, b.y_min() * scale + anchor_y,
                             b.x_max() * scale + anchor_x, b.y_max() * scale + anchor_y));
  }
  return out;
}

AugmentResult rescale_pad_augment(const Image& img, const std::vector<BBox>& boxes,
                                  double min_scale, Rng& rng, bool random_offset) {
  if (!(min_scale > 0.0 && min_scale <= 1.0)) {
    throw std::invalid_argument("rescale_pad_augment: min_scale must be in (0,1]");
  }
  const double scale = rng.uniform(min_scale, 1.0);
  int ax = 0, ay = 0;
  if (random_offset) {
    const int sw = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
    const int sh = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
    ax = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(img.width() - sw + 1)));
    ay = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(img.height() - sh + 1)));
  }
  return rescale_pad(img, boxes, scale, ax, ay);
}

}  // namespace soctrack
