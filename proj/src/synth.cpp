#include "soctrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "soctrack/errors.hpp"
#include "soctrack/geometry.hpp"
#include "soctrack/rng.hpp"

namespace soctrack {
namespace {

constexpr int kPlacementAttempts = 2000;

struct Player {
  double w = 0.0;
  double h = 0.0;
  double x = 0.0;  // left
  double y = 0.0;  // top
  double vx = 0.0;
  double vy = 0.0;

  BBox box() const { return BBox(x, y, x + w, y + h); }
};

struct Region {
  double x_lo, x_hi, y_lo, y_hi;  // allowed range of the top-left corner
};

Region placement_region(const ScenarioSpec& spec, double w, double h) {
  return Region{spec.field_margin,
                spec.width - spec.field_margin - w,
                spec.crowd_band + spec.field_margin,
                spec.height - spec.field_margin - h};
}

bool too_close(const ScenarioSpec& spec, const BBox& a, const BBox& b) {
  if (spec.max_pair_iou > 0.0) return iou(a, b) > spec.max_pair_iou;
  double g = spec.min_gap;
  return a.x_min() < b.x_max() + g && b.x_min() < a.x_max() + g &&
         a.y_min() < b.y_max() + g && b.y_min() < a.y_max() + g;
}

double reflect(double v, double lo, double hi, double& vel) {
  if (v < lo) {
    vel = -vel;
    return lo + (lo - v);
  }
  if (v > hi) {
    vel = -vel;
    return hi - (v - hi);
  }
  return v;
}

void draw_heading(Player& p, double max_speed, Rng& rng) {
  double speed = rng.uniform(0.25, 1.0) * max_speed;
  double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  p.vx = speed * std::cos(angle);
  p.vy = speed * std::sin(angle);
}

BBox sample_box(const ScenarioSpec& spec, Rng& rng) {
  double w = rng.uniform(spec.min_box_w, spec.max_box_w);
  double h = rng.uniform(spec.min_box_h, spec.max_box_h);
  Region r = placement_region(spec, w, h);
  double x = rng.uniform(r.x_lo, r.x_hi);
  double y = rng.uniform(r.y_lo, r.y_hi);
  return BBox(x, y, x + w, y + h);
}

}  // namespace

void ScenarioSpec::validate() const {
  if (width <= 0 || height <= 0) throw InfeasibleSpecError("frame size must be positive");
  if (frame_count < 1) throw InfeasibleSpecError("frame_count must be at least 1");
  if (player_count < 0) throw InfeasibleSpecError("player_count must be non-negative");
  if (!(min_box_w > 0.0) || !(min_box_h > 0.0) || min_box_w > max_box_w ||
      min_box_h > max_box_h) {
    throw InfeasibleSpecError("box size range is empty or non-positive");
  }
  if (!(max_speed >= 0.0)) throw InfeasibleSpecError("max_speed must be non-negative");
  if (turn_prob < 0.0 || turn_prob > 1.0) throw InfeasibleSpecError("turn_prob must be in [0, 1]");
  if (crowd_band < 0 || crowd_band >= height) throw InfeasibleSpecError("crowd_band must fit inside the frame");
  if (field_margin < 0.0) throw InfeasibleSpecError("field_margin must be non-negative");
  if (min_gap < 0.0) throw InfeasibleSpecError("min_gap must be non-negative");
  double usable_w = width - 2.0 * field_margin - max_box_w;
  double usable_h = height - crowd_band - 2.0 * field_margin - max_box_h;
  if (usable_w < 0.0 || usable_h < 0.0) {
    throw InfeasibleSpecError("field area cannot hold the largest box");
  }
}

std::vector<Track> generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::vector<Player> players;
  players.reserve(spec.player_count);
  for (int i = 0; i < spec.player_count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      BBox cand = sample_box(spec, rng);
      bool clear = true;
      for (const Player& other : players) {
        if (too_close(spec, cand, other.box())) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      Player p;
      p.w = cand.width();
      p.h = cand.height();
      p.x = cand.x_min();
      p.y = cand.y_min();
      draw_heading(p, spec.max_speed, rng);
      players.push_back(p);
      placed = true;
    }
    if (!placed) {
      throw InfeasibleSpecError("could not place players without overlap; "
                                "reduce player_count or box sizes");
    }
  }

  std::vector<Track> tracks(spec.player_count);
  for (int i = 0; i < spec.player_count; ++i) {
    tracks[i].id = i + 1;
    tracks[i].state = TrackState::kActive;
    tracks[i].entries.reserve(spec.frame_count);
  }

  for (int frame = 1; frame <= spec.frame_count; ++frame) {
    for (int i = 0; i < spec.player_count; ++i) {
      tracks[i].entries.push_back(TrackEntry{frame, players[i].box(), {}});
    }
    if (frame == spec.frame_count) break;

    for (int i = 0; i < spec.player_count; ++i) {
      Player& p = players[i];
      if (rng.uniform() < spec.turn_prob) draw_heading(p, spec.max_speed, rng);
      Region r = placement_region(spec, p.w, p.h);
      double vx = p.vx;
      double vy = p.vy;
      double nx = reflect(p.x + vx, r.x_lo, r.x_hi, vx);
      double ny = reflect(p.y + vy, r.y_lo, r.y_hi, vy);
      BBox cand(nx, ny, nx + p.w, ny + p.h);
      bool clear = true;
      for (int j = 0; j < spec.player_count; ++j) {
        if (j == i) continue;
        if (too_close(spec, cand, players[j].box())) {
          clear = false;
          break;
        }
      }
      if (clear) {
        p.x = nx;
        p.y = ny;
        p.vx = vx;
        p.vy = vy;
      } else {
        // Blocked: stay put this frame and head away from the neighbor.
        p.vx = -p.vx;
        p.vy = -p.vy;
      }
    }
  }
  return tracks;
}

std::vector<FrameDetections> corrupt_detections(const ScenarioSpec& spec,
                                                const std::vector<Track>& gt,
                                                const NoiseSpec& noise,
                                                std::uint64_t seed) {
  if (noise.miss_prob < 0.0 || noise.miss_prob > 1.0) {
    throw std::invalid_argument("miss_prob must be in [0, 1]");
  }
  if (noise.fp_rate < 0.0) throw std::invalid_argument("fp_rate must be non-negative");
  if (noise.jitter_sigma < 0.0) throw std::invalid_argument("jitter_sigma must be non-negative");
  if (noise.tp_conf_lo > noise.tp_conf_hi || noise.tp_conf_lo < 0.0 ||
      noise.tp_conf_hi > 1.0) {
    throw std::invalid_argument("tp confidence range must be within [0, 1]");
  }
  if (noise.fp_conf_lo > noise.fp_conf_hi || noise.fp_conf_lo < 0.0 ||
      noise.fp_conf_hi > 1.0) {
    throw std::invalid_argument("fp confidence range must be within [0, 1]");
  }

  Rng rng(seed);
  std::vector<FrameDetections> out;
  out.reserve(spec.frame_count);
  for (int frame = 1; frame <= spec.frame_count; ++frame) {
    FrameDetections fd(frame);
    std::vector<std::pair<BBox, double>> boxes;
    for (const auto& [id, box] : boxes_at(gt, frame)) {
      (void)id;
      if (noise.miss_prob > 0.0 && rng.uniform() < noise.miss_prob) continue;
      double x0 = box.x_min();
      double y0 = box.y_min();
      double x1 = box.x_max();
      double y1 = box.y_max();
      if (noise.jitter_sigma > 0.0) {
        x0 += rng.gaussian(0.0, noise.jitter_sigma);
        y0 += rng.gaussian(0.0, noise.jitter_sigma);
        x1 += rng.gaussian(0.0, noise.jitter_sigma);
        y1 += rng.gaussian(0.0, noise.jitter_sigma);
        // Jitter must not flip a box inside out.
        x1 = std::max(x1, x0 + 1.0);
        y1 = std::max(y1, y0 + 1.0);
      }
      double conf = rng.uniform(noise.tp_conf_lo, noise.tp_conf_hi);
      boxes.emplace_back(BBox(x0, y0, x1, y1), conf);
    }
    if (noise.fp_rate > 0.0) {
      int extra = static_cast<int>(rng.poisson(noise.fp_rate));
      for (int k = 0; k < extra; ++k) {
        BBox fake = sample_box(spec, rng);
        double conf = rng.uniform(noise.fp_conf_lo, noise.fp_conf_hi);
        boxes.emplace_back(fake, conf);
      }
    }
    if (noise.occlusion_merge) {
      // Collapse the first heavily overlapping pair repeatedly until stable.
      bool merged = true;
      while (merged) {
        merged = false;
        for (std::size_t a = 0; a + 1 < boxes.size() && !merged; ++a) {
          for (std::size_t b = a + 1; b < boxes.size() && !merged; ++b) {
            if (iou(boxes[a].first, boxes[b].first) <= noise.occlusion_iou) continue;
            BBox u(std::min(boxes[a].first.x_min(), boxes[b].first.x_min()),
                   std::min(boxes[a].first.y_min(), boxes[b].first.y_min()),
                   std::max(boxes[a].first.x_max(), boxes[b].first.x_max()),
                   std::max(boxes[a].first.y_max(), boxes[b].first.y_max()));
            boxes[a] = {u, std::max(boxes[a].second, boxes[b].second)};
            boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(b));
            merged = true;
          }
        }
      }
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      fd.add(Detection(frame, boxes[i].first, boxes[i].second,
                       EmbeddingKey{frame, static_cast<int>(i)}));
    }
    out.push_back(std::move(fd));
  }
  return out;
}

std::vector<std::pair<TrackId, BBox>> boxes_at(const std::vector<Track>& gt,
                                               int frame) {
  std::vector<std::pair<TrackId, BBox>> out;
  for (const Track& t : gt) {
    for (const TrackEntry& e : t.entries) {
      if (e.frame == frame) {
        out.emplace_back(t.id, e.bbox);
        break;
      }
      if (e.frame > frame) break;
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

Image render_frame(const ScenarioSpec& spec,
                   const std::vector<std::pair<TrackId, BBox>>& boxes) {
  spec.validate();
  Image img(spec.width, spec.height, pitch_color());
  Rgb crowd = crowd_color();
  for (int y = 0; y < spec.crowd_band; ++y) {
    for (int x = 0; x < spec.width; ++x) img.at(x, y) = crowd;
  }
  for (const auto& [id, box] : boxes) {
    Rgb c = player_color(id);
    int x0 = static_cast<int>(std::ceil(box.x_min() - 0.5));
    int x1 = static_cast<int>(std::ceil(box.x_max() - 0.5));
    int y0 = static_cast<int>(std::ceil(box.y_min() - 0.5));
    int y1 = static_cast<int>(std::ceil(box.y_max() - 0.5));
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, spec.width);
    y1 = std::min(y1, spec.height);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) img.at(x, y) = c;
    }
  }
  return img;
}

Rgb player_color(TrackId id) {
  // 5 hues x 4 saturations x 2 values, all hues well outside the pitch-green
  // band and landing in distinct 8x8x4 histogram bins even after the integer
  // HSV round trip.
  static constexpr int kHues[5] = {0, 95, 118, 140, 163};
  static constexpr int kSats[4] = {90, 150, 210, 255};
  static constexpr int kVals[2] = {140, 255};
  long idx = static_cast<long>(((id % 40) + 40) % 40);
  int h = kHues[idx % 5];
  int s = kSats[(idx / 5) % 4];
  int v = kVals[(idx / 20) % 2];
  return hsv_to_rgb(h, s, v, HueScale::kDeg180);
}

Rgb pitch_color() { return Rgb{118, 160, 35}; }

Rgb crowd_color() { return Rgb{128, 128, 128}; }

}  // namespace soctrack
