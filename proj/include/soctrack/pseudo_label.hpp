#pragma once

#include <map>
#include <string>
#include <vector>

#include "soctrack/detections.hpp"
#include "soctrack/field_mask.hpp"
#include "soctrack/image.hpp"
#include "soctrack/rng.hpp"
#include "soctrack/tracker.hpp"

namespace soctrack {

enum class LabelSource { kTeacher, kBlob };

struct LabeledBox {
  BBox bbox;
  LabelSource source;
};

// Per-frame pseudo-labels with provenance.
using LabelSet = std::map<int, std::vector<LabeledBox>>;

struct PseudoLabelConfig {
  // Teacher detections below or at this confidence are dropped.
  double sigma = 0.8;
  // Minimum fraction of a box inside the field mask.
  double min_field_overlap = 0.3;
  // Area window for recovered blobs, relative to the median area of the
  // surviving detections; the absolute window applies when none survive.
  double blob_area_lo = 0.3;
  double blob_area_hi = 3.0;
  double abs_area_lo = 150.0;
  double abs_area_hi = 5000.0;
  // A blob overlapping any existing box at or above this IOU is discarded.
  double max_existing_iou = 0.2;
  // Candidate verifier gates: height/width ratio window and the minimum
  // fraction of non-green pixels inside the box.
  double min_aspect = 1.0;
  double max_aspect = 4.5;
  double min_nongreen_frac = 0.3;
  HsvRange green;
};

// Pluggable plausibility check for recovered candidates.
class Verifier {
 public:
  virtual ~Verifier() = default;
  virtual bool verify(int frame, const Image& img, const BBox& box) const = 0;
};

// Shape and color heuristic: the box must be roughly person-proportioned and
// mostly non-green. Stands in for a learned person classifier.
class HeuristicVerifier final : public Verifier {
 public:
  explicit HeuristicVerifier(PseudoLabelConfig cfg = {}) : cfg_(cfg) {}
  bool verify(int frame, const Image& img, const BBox& box) const override;

 private:
  PseudoLabelConfig cfg_;
};

// Verdicts read from a CSV of  frame,x_min,y_min,x_max,y_max,verdict  rows
// (verdict 0 or 1, coordinates matched within a small tolerance). Candidates
// without a row are rejected.
class VerdictFileVerifier final : public Verifier {
 public:
  explicit VerdictFileVerifier(const std::string& path);
  bool verify(int frame, const Image& img, const BBox& box) const override;

 private:
  struct Row {
    double x_min, y_min, x_max, y_max;
    bool verdict;
  };
  std::map<int, std::vector<Row>> rows_;
};

// Convenience form of the heuristic check.
bool verify_candidate(const Image& img, const BBox& box,
                      const PseudoLabelConfig& cfg = {});

// Non-green connected regions inside the field mask whose enclosing boxes
// pass the area window, overlap no existing box at max_existing_iou or more,
// and satisfy the verifier. Returned in raster order of the blobs.
std::vector<BBox> detect_missed_players(const Image& img, const FieldMask& mask,
                                        const std::vector<BBox>& existing,
                                        const PseudoLabelConfig& cfg,
                                        const Verifier& verifier, int frame = 0);

// One frame of label correction: confidence filter, field filter, then blob
// recovery of players the teacher missed. Survivors keep kTeacher provenance,
// recovered boxes get kBlob.
std::vector<LabeledBox> correct_annotations(const FrameDetections& dets,
                                            const Image& img, const FieldMask& mask,
                                            const PseudoLabelConfig& cfg,
                                            const Verifier& verifier);

// Tracks grown with spatial association only (no re-identification), keeping
// those strictly longer than min_len. Input frames must be strictly
// increasing.
std::vector<Track> generate_reid_tracks(const std::vector<FrameDetections>& frames,
                                        double tau_iou = 0.7, int min_len = 5);

struct ReidSample {
  TrackId track_id;
  int frame;
  BBox bbox;
};

// K identities by T samples, stored identity-major: samples[k * t_count + t].
struct ReidBatch {
  std::size_t k_count = 0;
  std::size_t t_count = 0;
  std::vector<ReidSample> samples;
};

// Samples K distinct tracks (each with at least T entries), then T distinct
// entries per track, ordered by frame. Throws InsufficientTracksError when
// fewer than K tracks qualify.
ReidBatch sample_triplet_batch(const std::vector<Track>& tracks, std::size_t k,
                               std::size_t t, Rng& rng);

struct AugmentResult {
  Image image;
  std::vector<BBox> boxes;
  double scale = 1.0;
};

// Deterministic core: rescales image and boxes by `scale`, pastes the result
// at `anchor` (top-left, integer pixels) on a black canvas of the original
// size. Box aspect ratios are preserved exactly.
AugmentResult rescale_pad(const Image& img, const std::vector<BBox>& boxes,
                          double scale, int anchor_x = 0, int anchor_y = 0);

// Draws scale uniformly from [min_scale, 1]; with random_offset the anchor is
// drawn uniformly among valid positions, otherwise top-left.
AugmentResult rescale_pad_augment(const Image& img, const std::vector<BBox>& boxes,
                                  double min_scale, Rng& rng,
                                  bool random_offset = false);

}  // namespace soctrack
