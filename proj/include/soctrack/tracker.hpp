#pragma once

#include <optional>
#include <vector>

#include "soctrack/detections.hpp"
#include "soctrack/embedding.hpp"
#include "soctrack/geometry.hpp"

namespace soctrack {

using TrackId = long;

enum class TrackState { kActive, kDeactivated, kKilled };

struct TrackEntry {
  int frame;
  BBox bbox;
  std::optional<Embedding> embedding;
};

struct Track {
  TrackId id = 0;
  std::vector<TrackEntry> entries;  // strictly increasing frame indices
  TrackState state = TrackState::kActive;
  // Frames spent deactivated; meaningful only in kDeactivated state.
  int age = 0;

  const TrackEntry& last() const { return entries.back(); }
  std::size_t length() const { return entries.size(); }
};

struct TrackerConfig {
  // Detections at or below this confidence are invisible to the tracker.
  double sigma_track = 0.5;
  // Spatial association gate.
  double tau_iou = 0.7;
  // How many frames a deactivated track stays eligible for re-identification.
  int n_reid = 10;
  // Weight of the visual term in the re-identification cost; the spatial term
  // gets 1 - alpha.
  double alpha = 0.03;
  // Absolute ceiling on visual distance for re-identification candidates.
  double d_visual_max = 4.0;
  // Spatial ceiling, as a fraction of image width.
  double d_spatial_max_frac = 1.0 / 16.0;
  // Re-identification cost averages over at most this many trailing entries.
  int k_last = 5;
  // finalize() drops tracks shorter than this.
  int min_track_len = 5;

  void validate() const;
};

// One frame of spatial association between the previous boxes (active tracks)
// and the current boxes. A pair matches only when it is exclusive: the current
// box exceeds the IOU gate with exactly one previous box, and that previous
// box exceeds the gate with no other current box. Current boxes overlapping
// several previous boxes, or sharing their previous box with another current
// box, stay unmatched; so does everything below the gate.
struct SpatialResult {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (prev, cur)
  std::vector<std::size_t> leftovers;  // unmatched current boxes
  std::vector<std::size_t> lost;       // unmatched previous boxes
};
SpatialResult spatial_associate(const std::vector<BBox>& prev,
                                const std::vector<BBox>& cur, double tau_iou);

// Re-identification cost of pairing a detection with a deactivated track:
// alpha * L2-embedding distance + (1 - alpha) * center distance, averaged over
// the track's last k_last entries. Throws MissingEmbeddingError when a
// consulted entry has none.
double track_cost(const BBox& det_box, const Embedding& det_emb,
                  const Track& track, const TrackerConfig& cfg);

// Gated optimal matching between deactivated tracks and leftover detections.
// Pairs whose visual distance to the track's most recent entry reaches
// d_visual_max, or whose center distance reaches d_spatial_max_frac * width,
// are excluded. Returns (track index, detection index) pairs.
std::vector<std::pair<std::size_t, std::size_t>> reid_associate(
    const std::vector<Track>& deactivated, const std::vector<Detection>& leftovers,
    const std::vector<Embedding>& leftover_embs, const TrackerConfig& cfg,
    int image_width);

// Online tracker: confidence filter, spatial association against active
// tracks, re-identification against the deactivated store, new-track creation,
// aging. Feed frames in strictly increasing order.
class Tracker {
 public:
  Tracker(TrackerConfig cfg, int image_width);

  // Advances one frame. embeddings must parallel dets.items() when given; it
  // may be empty, in which case re-identification raises
  // MissingEmbeddingError if it ever needs one. Returns one entry per input
  // detection: the track id it joined, or nullopt if it was filtered or
  // discarded as ambiguous.
  std::vector<std::optional<TrackId>> step(
      const FrameDetections& dets,
      const std::vector<Embedding>& embeddings = {});

  // All tracks ever created (any state) with at least min_track_len entries,
  // ordered by id.
  std::vector<Track> finalize() const;

  const std::vector<Track>& active() const { return active_; }
  const std::vector<Track>& deactivated() const { return deactivated_; }
  const std::vector<Track>& killed() const { return killed_; }
  int image_width() const { return image_width_; }

 private:
  TrackerConfig cfg_;
  int image_width_;
  std::vector<Track> active_, deactivated_, killed_;
  TrackId next_id_ = 1;
  int last_frame_ = -1;
  bool started_ = false;
};

// Fills frame gaps of a track by linear interpolation of box corners.
// Intended for rendering only; interpolated entries carry no embedding.
Track interpolate_gaps(const Track& track);

}  // namespace soctrack
