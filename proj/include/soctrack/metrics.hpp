#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soctrack/detections.hpp"
#include "soctrack/geometry.hpp"
#include "soctrack/tracker.hpp"

namespace soctrack {

struct ScoredBox {
  BBox bbox;
  double confidence;
};

using GtFrames = std::map<int, std::vector<BBox>>;
using DetFrames = std::map<int, std::vector<ScoredBox>>;

struct IdBox {
  TrackId id;
  BBox bbox;
};
// Identity-carrying boxes per frame; an id may appear at most once per frame.
using IdFrames = std::map<int, std::vector<IdBox>>;

// Detections ranked by confidence (ties: frame, then input order) are matched
// greedily to the not-yet-matched ground-truth box of highest IOU at or above
// iou_thresh in their frame. Average precision integrates the all-point
// precision envelope over recall. No ground truth gives NaN.
double average_precision(const GtFrames& gt, const DetFrames& dets,
                         double iou_thresh = 0.5);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0, fp = 0, fn = 0;
};

// Same matching as average_precision, restricted to detections with
// confidence strictly above conf_thresh. f1 = 2PR / (P + R).
Prf precision_recall_f1(const GtFrames& gt, const DetFrames& dets,
                        double iou_thresh = 0.5, double conf_thresh = 0.5);

struct MotaResult {
  double mota = 0.0;  // 1.0 is perfect; NaN when gt_total is 0
  long fp = 0, fn = 0, idsw = 0;
  long gt_total = 0;
};

// CLEAR-MOT events. Correspondences persist: pairs matched in the previous
// frame stay matched while both survive and clear the IOU gate; the remainder
// is matched per frame by minimum total (1 - IOU) at maximum cardinality. An
// identity switch is counted when a ground-truth id is matched to a different
// hypothesis than the last one it was ever matched to.
MotaResult mota(const IdFrames& gt, const IdFrames& hyp, double iou_thresh = 0.5);

struct Idf1Result {
  double idf1 = 0.0;  // NaN when gt is empty
  long idtp = 0, idfp = 0, idfn = 0;
};

// Identity-F1: one global bijective mapping between ground-truth and
// hypothesis identities chosen to maximize the number of frame-wise matches
// at the IOU gate; IDF1 = 2 IDTP / (2 IDTP + IDFP + IDFN).
Idf1Result idf1(const IdFrames& gt, const IdFrames& hyp, double iou_thresh = 0.5);

struct MetricsReport {
  std::optional<double> ap;
  std::optional<Prf> prf;
  std::optional<MotaResult> clear_mot;
  std::optional<Idf1Result> identity;

  // Human-readable block, one metric per line; percentages with one decimal.
  std::string to_text() const;
  static std::string csv_header();
  std::string to_csv_row(const std::string& name) const;
};

// Per-frame views used by the evaluation entry points.
IdFrames id_frames_from_tracks(const std::vector<Track>& tracks);
GtFrames boxes_only(const IdFrames& frames);
DetFrames scored_frames(const std::vector<FrameDetections>& frames);

}  // namespace soctrack
