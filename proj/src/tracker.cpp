#include "soctrack/tracker.hpp"

#include <algorithm>
#include <stdexcept>

#include "soctrack/assignment.hpp"
#include "soctrack/errors.hpp"

namespace soctrack {

void TrackerConfig::validate() const {
  if (!(sigma_track >= 0.0 && sigma_track <= 1.0)) {
    throw std::invalid_argument("TrackerConfig: sigma_track must be in [0,1]");
  }
  if (!(tau_iou > 0.0 && tau_iou <= 1.0)) {
    throw std::invalid_argument("TrackerConfig: tau_iou must be in (0,1]");
  }
  if (n_reid < 0) throw std::invalid_argument("TrackerConfig: n_reid must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("TrackerConfig: alpha must be in [0,1]");
  }
  if (!(d_visual_max > 0.0)) {
    throw std::invalid_argument("TrackerConfig: d_visual_max must be positive");
  }
  if (!(d_spatial_max_frac > 0.0)) {
    throw std::invalid_argument("TrackerConfig: d_spatial_max_frac must be positive");
  }
  if (k_last < 1) throw std::invalid_argument("TrackerConfig: k_last must be >= 1");
  if (min_track_len < 0) {
    throw std::invalid_argument("TrackerConfig: min_track_len must be >= 0");
  }
}

SpatialResult spatial_associate(const std::vector<BBox>& prev,
                                const std::vector<BBox>& cur, double tau_iou) {
  SpatialResult res;
  const std::size_t np = prev.size(), nc = cur.size();

  // candidate[j] = previous boxes the current box j clears the gate with.
  std::vector<std::vector<std::size_t>> candidates(nc);
  std::vector<int> claims(np, 0);  // current boxes wanting each previous box
  for (std::size_t j = 0; j < nc; ++j) {
    for (std::size_t i = 0; i < np; ++i) {
      if (iou(prev[i], cur[j]) > tau_iou) candidates[j].push_back(i);
    }
    if (candidates[j].size() == 1) ++claims[candidates[j].front()];
  }

  std::vector<char> prev_matched(np, 0);
  for (std::size_t j = 0; j < nc; ++j) {
    if (candidates[j].size() == 1 && claims[candidates[j].front()] == 1) {
      res.matches.emplace_back(candidates[j].front(), j);
      prev_matched[candidates[j].front()] = 1;
    } else {
      res.leftovers.push_back(j);
    }
  }
  for (std::size_t i = 0; i < np; ++i) {
    if (!prev_matched[i]) res.lost.push_back(i);
  }
  return res;
}

double track_cost(const BBox& det_box, const Embedding& det_emb,
                  const Track& track, const TrackerConfig& cfg) {
  if (track.entries.empty()) {
    throw std::invalid_argument("track_cost: track has no entries");
  }
  const std::size_t k = std::min<std::size_t>(
      static_cast<std::size_t>(cfg.k_last), track.entries.size());
  double sum = 0.0;
  for (std::size_t i = track.entries.size() - k; i < track.entries.size(); ++i) {
    const TrackEntry& e = track.entries[i];
    if (!e.embedding) {
      throw MissingEmbeddingError("track_cost: track entry has no embedding");
    }
    const double dv = visual_distance(det_emb, *e.embedding);
    const double ds = center_distance(det_box, e.bbox);
    sum += cfg.alpha * dv + (1.0 - cfg.alpha) * ds;
  }
  return sum / static_cast<double>(k);
}

std::vector<std::pair<std::size_t, std::size_t>> reid_associate(
    const std::vector<Track>& deactivated, const std::vector<Detection>& leftovers,
    const std::vector<Embedding>& leftover_embs, const TrackerConfig& cfg,
    int image_width) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (deactivated.empty() || leftovers.empty()) return out;
  if (leftover_embs.size() != leftovers.size()) {
    throw MissingEmbeddingError("reid_associate: one embedding per leftover detection is required");
  }
  const double d_spatial_max = cfg.d_spatial_max_frac * image_width;

  CostMatrix costs(deactivated.size(), leftovers.size());
  for (std::size_t i = 0; i < deactivated.size(); ++i) {
    const Track& tr = deactivated[i];
    const TrackEntry& recent = tr.last();
    if (!recent.embedding) {
      throw MissingEmbeddingError("reid_associate: track entry has no embedding");
    }
    for (std::size_t j = 0; j < leftovers.size(); ++j) {
      const double dv = visual_distance(leftover_embs[j], *recent.embedding);
      const double ds = center_distance(leftovers[j].bbox(), recent.bbox);
      if (dv >= cfg.d_visual_max || ds >= d_spatial_max) {
        costs.forbid(i, j);
      } else {
        costs.set(i, j, track_cost(leftovers[j].bbox(), leftover_embs[j], tr, cfg));
      }
    }
  }
  return solve_assignment(costs).pairs;
}

Tracker::Tracker(TrackerConfig cfg, int image_width)
    : cfg_(cfg), image_width_(image_width) {
  cfg_.validate();
  if (image_width <= 0) {
    throw std::invalid_argument("Tracker: image_width must be positive");
  }
}

std::vector<std::optional<TrackId>> Tracker::step(
    const FrameDetections& dets, const std::vector<Embedding>& embeddings) {
  if (started_ && dets.frame() <= last_frame_) {
    throw OutOfOrderFrameError("Tracker::step: frame " + std::to_string(dets.frame()) +
                               " after frame " + std::to_string(last_frame_));
  }
  if (!embeddings.empty() && embeddings.size() != dets.size()) {
    throw std::invalid_argument("Tracker::step: embeddings must parallel detections");
  }
  started_ = true;
  last_frame_ = dets.frame();

  std::vector<std::optional<TrackId>> result(dets.size());

  // Visibility filter; `kept` maps compact indices back to detection indices.
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets.items()[i].confidence() > cfg_.sigma_track) kept.push_back(i);
  }

  auto embedding_of = [&](std::size_t det_index) -> std::optional<Embedding> {
    if (embeddings.empty()) return std::nullopt;
    return embeddings[det_index];
  };

  // Spatial association against active tracks, in track order.
  std::vector<BBox> prev_boxes;
  prev_boxes.reserve(active_.size());
  for (const Track& t : active_) prev_boxes.push_back(t.last().bbox);
  std::vector<BBox> cur_boxes;
  cur_boxes.reserve(kept.size());
  for (std::size_t i : kept) cur_boxes.push_back(dets.items()[i].bbox());

  const SpatialResult spatial = spatial_associate(prev_boxes, cur_boxes, cfg_.tau_iou);

  std::vector<Track> next_active;
  for (const auto& [pi, cj] : spatial.matches) {
    const std::size_t det_index = kept[cj];
    Track& t = active_[pi];
    t.entries.push_back(TrackEntry{dets.frame(), dets.items()[det_index].bbox(),
                                   embedding_of(det_index)});
    result[det_index] = t.id;
    next_active.push_back(std::move(t));
  }
  // Tracks that lost their detection enter the deactivated store at age 1.
  for (std::size_t pi : spatial.lost) {
    Track& t = active_[pi];
    t.state = TrackState::kDeactivated;
    t.age = 1;
    deactivated_.push_back(std::move(t));
  }
  std::sort(deactivated_.begin(), deactivated_.end(),
            [](const Track& a, const Track& b) { return a.id < b.id; });

  // Re-identification of leftovers against recently deactivated tracks. A
  // track deactivated this very frame is already eligible, which catches pure
  // gate failures without a frame of delay.
  std::vector<std::size_t> reid_pool;  // indices into deactivated_
  for (std::size_t i = 0; i < deactivated_.size(); ++i) {
    if (deactivated_[i].age <= cfg_.n_reid) reid_pool.push_back(i);
  }
  std::vector<std::size_t> leftover_det;  // detection indices
  for (std::size_t cj : spatial.leftovers) leftover_det.push_back(kept[cj]);

  std::vector<char> leftover_taken(leftover_det.size(), 0);
  if (!reid_pool.empty() && !leftover_det.empty()) {
    std::vector<Track> pool;
    pool.reserve(reid_pool.size());
    for (std::size_t i : reid_pool) pool.push_back(deactivated_[i]);
    std::vector<Detection> cands;
    std::vector<Embedding> cand_embs;
    for (std::size_t det_index : leftover_det) {
      cands.push_back(dets.items()[det_index]);
      if (!embeddings.empty()) cand_embs.push_back(embeddings[det_index]);
    }
    const auto pairs = reid_associate(pool, cands, cand_embs, cfg_, image_width_);
    std::vector<std::size_t> revived;
    for (const auto& [ti, dj] : pairs) {
      const std::size_t det_index = leftover_det[dj];
      Track& t = deactivated_[reid_pool[ti]];
      t.entries.push_back(TrackEntry{dets.frame(), dets.items()[det_index].bbox(),
                                     embedding_of(det_index)});
      t.state = TrackState::kActive;
      t.age = 0;
      result[det_index] = t.id;
      leftover_taken[dj] = 1;
      next_active.push_back(std::move(t));
      revived.push_back(reid_pool[ti]);
    }
    std::sort(revived.begin(), revived.end());
    for (auto it = revived.rbegin(); it != revived.rend(); ++it) {
      deactivated_.erase(deactivated_.begin() + static_cast<std::ptrdiff_t>(*it));
    }
  }

  // Remaining leftovers start new tracks, in detection order.
  for (std::size_t dj = 0; dj < leftover_det.size(); ++dj) {
    if (leftover_taken[dj]) continue;
    const std::size_t det_index = leftover_det[dj];
    Track t;
    t.id = next_id_++;
    t.entries.push_back(TrackEntry{dets.frame(), dets.items()[det_index].bbox(),
                                   embedding_of(det_index)});
    result[det_index] = t.id;
    next_active.push_back(std::move(t));
  }

  // Unrevived deactivated tracks age; past n_reid they are gone for good.
  std::vector<Track> still_deactivated;
  for (Track& t : deactivated_) {
    t.age += 1;
    if (t.age > cfg_.n_reid) {
      t.state = TrackState::kKilled;
      killed_.push_back(std::move(t));
    } else {
      still_deactivated.push_back(std::move(t));
    }
  }
  deactivated_ = std::move(still_deactivated);

  std::sort(next_active.begin(), next_active.end(),
            [](const Track& a, const Track& b) { return a.id < b.id; });
  active_ = std::move(next_active);
  return result;
}

std::vector<Track> Tracker::finalize() const {
  std::vector<Track> out;
  for (const auto* pool : {&active_, &deactivated_, &killed_}) {
    for (const Track& t : *pool) {
      if (t.length() >= static_cast<std::size_t>(cfg_.min_track_len)) {
        out.push_back(t);
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Track& a, const Track& b) { return a.id < b.id; });
  return out;
}

Track interpolate_gaps(const Track& track) {
  Track out;
  out.id = track.id;
  out.state = track.state;
  out.age = track.age;
  for (std::size_t i = 0; i < track.entries.size(); ++i) {
    const TrackEntry& e = track.entries[i];
    if (!out.entries.empty()) {
      // Copy: push_back below reallocates and would invalidate a reference.
      const TrackEntry prev = out.entries.back();
      for (int f = prev.frame + 1; f < e.frame; ++f) {
        const double t = static_cast<double>(f - prev.frame) /
                         static_cast<double>(e.frame - prev.frame);
        auto lerp = [&](double a, double b) { return a + t * (b - a); };
        out.entries.push_back(TrackEntry{
            f,
            BBox(lerp(prev.bbox.x_min(), e.bbox.x_min()),
                 lerp(prev.bbox.y_min(), e.bbox.y_min()),
                 lerp(prev.bbox.x_max(), e.bbox.x_max()),
                 lerp(prev.bbox.y_max(), e.bbox.y_max())),
            std::nullopt});
      }
    }
    out.entries.push_back(e);
  }
  return out;
}

}  // namespace soctrack
