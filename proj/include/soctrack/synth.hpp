#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "soctrack/detections.hpp"
#include "soctrack/image.hpp"
#include "soctrack/tracker.hpp"

namespace soctrack {

// Desk-scale stand-in for broadcast footage: a green pitch below a grey crowd
// band, with solid-colored players bouncing around it.
struct ScenarioSpec {
  int width = 960;
  int height = 540;
  int frame_count = 250;
  int player_count = 22;
  double min_box_w = 16.0;
  double max_box_w = 24.0;
  double min_box_h = 32.0;
  double max_box_h = 48.0;
  double max_speed = 2.0;   // pixels per frame
  double turn_prob = 0.15;  // chance per frame to redraw heading and speed
  int crowd_band = 60;      // rows of non-field at the top
  double field_margin = 2.0;
  // Players reject moves that overlap another player beyond this IOU. At 0
  // they additionally keep min_gap apart; 2.0 leaves at least one empty pixel
  // between rendered rectangles, so blobs never merge.
  double max_pair_iou = 0.0;
  double min_gap = 2.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct NoiseSpec {
  double miss_prob = 0.0;
  double fp_rate = 0.0;  // expected false positives per frame (Poisson)
  double jitter_sigma = 0.0;  // corner jitter, pixels
  double tp_conf_lo = 0.7;
  double tp_conf_hi = 1.0;
  double fp_conf_lo = 0.1;
  double fp_conf_hi = 0.6;
  bool occlusion_merge = false;
  double occlusion_iou = 0.3;

  // Identity corruption: every ground-truth box passes through at confidence
  // exactly 1.
  static NoiseSpec none() {
    NoiseSpec n;
    n.tp_conf_lo = 1.0;
    n.tp_conf_hi = 1.0;
    return n;
  }
};

// Reflecting random walk of player_count boxes over frames 1..frame_count.
// Tracks come back ordered by id (1..player_count), one entry per frame.
// Throws InfeasibleSpecError when the players cannot be placed.
std::vector<Track> generate_scenario(const ScenarioSpec& spec);

// Detector simulation on top of ground truth: misses, corner jitter,
// confidence sampling, Poisson false positives inside the field area, and an
// optional merge of heavily overlapping boxes into one. The stream is fully
// determined by the seed.
std::vector<FrameDetections> corrupt_detections(const ScenarioSpec& spec,
                                                const std::vector<Track>& gt,
                                                const NoiseSpec& noise,
                                                std::uint64_t seed);

// Ground-truth boxes present at one frame, ordered by track id.
std::vector<std::pair<TrackId, BBox>> boxes_at(const std::vector<Track>& gt,
                                               int frame);

// Rasterizes one frame: crowd band, pitch, players in the given order.
Image render_frame(const ScenarioSpec& spec,
                   const std::vector<std::pair<TrackId, BBox>>& boxes);

// Solid fill color of a player; 40 distinct non-green colors cycled by id.
Rgb player_color(TrackId id);
Rgb pitch_color();
Rgb crowd_color();

}  // namespace soctrack
