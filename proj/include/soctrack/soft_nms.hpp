#pragma once

#include "soctrack/detections.hpp"

namespace soctrack {

enum class NmsDecay { kLinear, kGaussian };

struct SoftNmsConfig {
  // Overlaps at or below the gate leave neighbours untouched.
  double iou_gate = 0.3;
  // Boxes whose decayed confidence drops below this are removed.
  double score_floor = 0.001;
  NmsDecay decay = NmsDecay::kLinear;
  // Only used by the Gaussian decay.
  double gaussian_sigma = 0.5;
};

// Soft non-maximum suppression. Repeatedly selects the highest-confidence
// remaining box and decays the confidence of boxes overlapping it beyond
// iou_gate: linear decay multiplies by (1 - IOU), Gaussian decay by
// exp(-IOU^2 / sigma). Ties on confidence are broken by input order, then by
// x_min and y_min. Box coordinates are never modified and confidences never
// increase; the output is ordered by decayed confidence.
FrameDetections soft_nms(const FrameDetections& dets, const SoftNmsConfig& cfg);

inline FrameDetections soft_nms(const FrameDetections& dets, double iou_gate,
                                double score_floor) {
  SoftNmsConfig cfg;
  cfg.iou_gate = iou_gate;
  cfg.score_floor = score_floor;
  return soft_nms(dets, cfg);
}

}  // namespace soctrack
