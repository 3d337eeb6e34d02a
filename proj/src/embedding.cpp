#include "soctrack/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "soctrack/errors.hpp"

namespace soctrack {

double visual_distance(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatchError("visual_distance: embedding dimensions differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a.values[i] - b.values[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

Embedding embed_histogram(const Image& img, const BBox& box,
                          const HistogramConfig& cfg) {
  if (cfg.hue_bins <= 0 || cfg.sat_bins <= 0 || cfg.val_bins <= 0) {
    throw std::invalid_argument("embed_histogram: bin counts must be positive");
  }
  const int x_first = std::max(0, static_cast<int>(std::ceil(box.x_min() - 0.5)));
  const int x_last = std::min(img.width() - 1,
                              static_cast<int>(std::ceil(box.x_max() - 0.5)) - 1);
  const int y_first = std::max(0, static_cast<int>(std::ceil(box.y_min() - 0.5)));
  const int y_last = std::min(img.height() - 1,
                              static_cast<int>(std::ceil(box.y_max() - 0.5)) - 1);
  if (x_first > x_last || y_first > y_last) {
    throw DegenerateBoxError("embed_histogram: box covers no pixels");
  }

  const int hue_max = (cfg.scale == HueScale::kDeg180) ? 180 : 360;
  Embedding out;
  out.values.assign(
      static_cast<std::size_t>(cfg.hue_bins) * cfg.sat_bins * cfg.val_bins, 0.0);
  for (int y = y_first; y <= y_last; ++y) {
    for (int x = x_first; x <= x_last; ++x) {
      const Hsv hsv = rgb_to_hsv(img.at(x, y), cfg.scale);
      const int hb = std::min(cfg.hue_bins - 1, hsv.h * cfg.hue_bins / hue_max);
      const int sb = std::min(cfg.sat_bins - 1, hsv.s * cfg.sat_bins / 256);
      const int vb = std::min(cfg.val_bins - 1, hsv.v * cfg.val_bins / 256);
      out.values[(static_cast<std::size_t>(hb) * cfg.sat_bins + sb) * cfg.val_bins + vb] += 1.0;
    }
  }
  double norm = 0.0;
  for (double v : out.values) norm += v * v;
  norm = std::sqrt(norm);
  for (double& v : out.values) v /= norm;
  return out;
}

void EmbeddingStore::insert(int frame, int index, Embedding e) {
  if (map_.empty()) {
    dim_ = e.dim();
  } else if (e.dim() != dim_) {
    throw DimensionMismatchError("EmbeddingStore: inconsistent dimension");
  }
  const auto [it, fresh] = map_.emplace(std::make_pair(frame, index), std::move(e));
  if (!fresh) throw ParseError("EmbeddingStore: duplicate key");
}

const Embedding& EmbeddingStore::lookup(int frame, int index) const {
  const auto it = map_.find({frame, index});
  if (it == map_.end()) {
    throw MissingKeyError("EmbeddingStore: no embedding for frame " +
                          std::to_string(frame) + " index " + std::to_string(index));
  }
  return it->second;
}

bool EmbeddingStore::contains(int frame, int index) const {
  return map_.find({frame, index}) != map_.end();
}

EmbeddingStore load_external_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_external_embeddings: cannot open " + path);
  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 3) {
      throw ParseError("load_external_embeddings: line " + std::to_string(line_no) +
                       ": expected frame,det_index,v0,...");
    }
    try {
      const int frame = std::stoi(cells[0]);
      const int index = std::stoi(cells[1]);
      Embedding e;
      e.values.reserve(cells.size() - 2);
      for (std::size_t i = 2; i < cells.size(); ++i) {
        e.values.push_back(std::stod(cells[i]));
      }
      store.insert(frame, index, std::move(e));
    } catch (const DimensionMismatchError&) {
      throw;
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("load_external_embeddings: line " + std::to_string(line_no) +
                       ": malformed number");
    }
  }
  return store;
}

std::size_t HistogramProvider::dimension() const {
  return static_cast<std::size_t>(cfg_.hue_bins) * cfg_.sat_bins * cfg_.val_bins;
}

double HistogramProvider::distance_scale() const { return std::sqrt(2.0); }

Embedding HistogramProvider::embed(const Image* frame_image,
                                   const Detection& det) const {
  if (frame_image == nullptr) {
    throw std::invalid_argument("HistogramProvider: a frame image is required");
  }
  return embed_histogram(*frame_image, det.bbox(), cfg_);
}

Embedding ExternalProvider::embed(const Image*, const Detection& det) const {
  if (!det.embedding_key()) {
    throw MissingKeyError("ExternalProvider: detection carries no embedding key");
  }
  return store_->lookup(det.embedding_key()->frame, det.embedding_key()->index);
}

double triplet_loss(const std::vector<std::vector<Embedding>>& groups,
                    double margin) {
  if (groups.size() < 2) {
    throw std::invalid_argument("triplet_loss: need at least two identities");
  }
  const std::size_t t = groups.front().size();
  if (t == 0) throw std::invalid_argument("triplet_loss: empty identity group");
  for (const auto& g : groups) {
    if (g.size() != t) {
      throw std::invalid_argument("triplet_loss: identity groups must be equal size");
    }
  }

  double loss = 0.0;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    for (std::size_t a = 0; a < t; ++a) {
      const Embedding& anchor = groups[k][a];
      double hardest_pos = 0.0;  // the anchor itself bounds this at 0
      for (std::size_t u = 0; u < t; ++u) {
        hardest_pos = std::max(hardest_pos, visual_distance(anchor, groups[k][u]));
      }
      double hardest_neg = std::numeric_limits<double>::infinity();
      for (std::size_t k2 = 0; k2 < groups.size(); ++k2) {
        if (k2 == k) continue;
        for (std::size_t u = 0; u < t; ++u) {
          hardest_neg = std::min(hardest_neg, visual_distance(anchor, groups[k2][u]));
        }
      }
      loss += std::max(0.0, margin + hardest_pos - hardest_neg);
    }
  }
  return loss;
}

}  // namespace soctrack
