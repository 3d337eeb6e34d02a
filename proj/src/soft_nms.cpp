#include "soctrack/soft_nms.hpp"

#include <cmath>
#include <stdexcept>

namespace soctrack {

namespace {

struct Pending {
  const Detection* det;
  double conf;        // decayed confidence
  std::size_t index;  // position in the input, for tie-breaking
};

// Highest decayed confidence wins; ties fall back to input order, then to
// box position so the choice is always unique.
bool precedes(const Pending& a, const Pending& b) {
  if (a.conf != b.conf) return a.conf > b.conf;
  if (a.index != b.index) return a.index < b.index;
  if (a.det->bbox().x_min() != b.det->bbox().x_min())
    return a.det->bbox().x_min() < b.det->bbox().x_min();
  return a.det->bbox().y_min() < b.det->bbox().y_min();
}

}  // namespace

FrameDetections soft_nms(const FrameDetections& dets, const SoftNmsConfig& cfg) {
  if (!(cfg.iou_gate > 0.0 && cfg.iou_gate <= 1.0)) {
    throw std::invalid_argument("soft_nms: iou_gate must be in (0,1]");
  }
  if (!(cfg.score_floor >= 0.0 && cfg.score_floor < 1.0)) {
    throw std::invalid_argument("soft_nms: score_floor must be in [0,1)");
  }
  if (cfg.decay == NmsDecay::kGaussian && !(cfg.gaussian_sigma > 0.0)) {
    throw std::invalid_argument("soft_nms: gaussian_sigma must be positive");
  }

  std::vector<Pending> pool;
  pool.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const Detection& d = dets.items()[i];
    if (d.confidence() >= cfg.score_floor) pool.push_back({&d, d.confidence(), i});
  }

  FrameDetections out(dets.frame());
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (precedes(pool[i], pool[best])) best = i;
    }
    const Pending chosen = pool[best];
    out.add(Detection(chosen.det->frame(), chosen.det->bbox(), chosen.conf,
                      chosen.det->embedding_key()));
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));

    std::vector<Pending> survivors;
    survivors.reserve(pool.size());
    for (Pending& p : pool) {
      const double ov = iou(chosen.det->bbox(), p.det->bbox());
      if (ov > cfg.iou_gate) {
        if (cfg.decay == NmsDecay::kLinear) {
          p.conf *= (1.0 - ov);
        } else {
          p.conf *= std::exp(-(ov * ov) / cfg.gaussian_sigma);
        }
      }
      if (p.conf >= cfg.score_floor) survivors.push_back(p);
    }
    pool.swap(survivors);
  }
  return out;
}

}  // namespace soctrack
