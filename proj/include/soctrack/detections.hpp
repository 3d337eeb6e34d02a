#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "soctrack/geometry.hpp"

namespace soctrack {

// Reference into an external embedding store: (frame, index of the detection
// within that frame's file order).
struct EmbeddingKey {
  int frame = 0;
  int index = 0;
};

class Detection {
 public:
  Detection(int frame, BBox box, double confidence,
            std::optional<EmbeddingKey> key = std::nullopt)
      : frame_(frame),
        bbox_(std::move(box)),
        confidence_(confidence),
        key_(key) {
    if (frame < 0) throw std::invalid_argument("Detection: frame must be >= 0");
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
      throw std::invalid_argument("Detection: confidence must be in [0,1]");
    }
  }

  int frame() const { return frame_; }
  const BBox& bbox() const { return bbox_; }
  double confidence() const { return confidence_; }
  const std::optional<EmbeddingKey>& embedding_key() const { return key_; }

 private:
  int frame_;
  BBox bbox_;
  double confidence_;
  std::optional<EmbeddingKey> key_;
};

// All detections of one frame. Every item carries the same frame index.
class FrameDetections {
 public:
  explicit FrameDetections(int frame) : frame_(frame) {
    if (frame < 0) throw std::invalid_argument("FrameDetections: frame must be >= 0");
  }

  FrameDetections(int frame, std::vector<Detection> items)
      : FrameDetections(frame) {
    for (auto& d : items) add(std::move(d));
  }

  void add(Detection d) {
    if (d.frame() != frame_) {
      throw std::invalid_argument("FrameDetections: frame index mismatch");
    }
    items_.push_back(std::move(d));
  }

  int frame() const { return frame_; }
  const std::vector<Detection>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

 private:
  int frame_;
  std::vector<Detection> items_;
};

// Keeps detections with confidence strictly greater than sigma; order preserved.
FrameDetections filter_by_confidence(const FrameDetections& dets, double sigma);

}  // namespace soctrack
