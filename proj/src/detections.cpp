#include "soctrack/detections.hpp"

namespace soctrack {

FrameDetections filter_by_confidence(const FrameDetections& dets, double sigma) {
  FrameDetections out(dets.frame());
  for (const auto& d : dets.items()) {
    if (d.confidence() > sigma) out.add(d);
  }
  return out;
}

}  // namespace soctrack
