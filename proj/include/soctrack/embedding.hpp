#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "soctrack/detections.hpp"
#include "soctrack/image.hpp"

namespace soctrack {

// Appearance descriptor. All distances are plain L2.
struct Embedding {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

// Throws DimensionMismatchError when the operands disagree in length.
double visual_distance(const Embedding& a, const Embedding& b);

struct HistogramConfig {
  int hue_bins = 8;
  int sat_bins = 8;
  int val_bins = 4;
  HueScale scale = HueScale::kDeg180;
};

// HSV color histogram over the pixels whose centers fall inside the box
// (clipped to the image), L2-normalized. Distances therefore live in
// [0, sqrt(2)]. Throws DegenerateBoxError when the box covers no pixel.
Embedding embed_histogram(const Image& img, const BBox& box,
                          const HistogramConfig& cfg = {});

// Embeddings precomputed elsewhere, keyed by (frame, detection index within
// the frame's file order).
class EmbeddingStore {
 public:
  void insert(int frame, int index, Embedding e);
  const Embedding& lookup(int frame, int index) const;  // MissingKeyError
  bool contains(int frame, int index) const;
  std::size_t size() const { return map_.size(); }
  std::size_t dimension() const { return dim_; }

 private:
  std::map<std::pair<int, int>, Embedding> map_;
  std::size_t dim_ = 0;
};

// CSV rows of the form  frame,det_index,v0,...,v{D-1}  with one consistent D.
EmbeddingStore load_external_embeddings(const std::string& path);

// Source of per-detection embeddings plus the scale its distances live on,
// so distance gates can default sensibly per provider.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  // Largest distance the provider can produce.
  virtual double distance_scale() const = 0;
  virtual double default_visual_gate() const { return 0.8 * distance_scale(); }
  // frame_image may be null for providers that do not need pixels.
  virtual Embedding embed(const Image* frame_image, const Detection& det) const = 0;
};

class HistogramProvider final : public EmbeddingProvider {
 public:
  explicit HistogramProvider(HistogramConfig cfg = {}) : cfg_(cfg) {}
  std::size_t dimension() const override;
  double distance_scale() const override;  // sqrt(2) for unit-norm histograms
  Embedding embed(const Image* frame_image, const Detection& det) const override;

 private:
  HistogramConfig cfg_;
};

class ExternalProvider final : public EmbeddingProvider {
 public:
  // The gate default equals the scale: externally trained descriptors are
  // normally used with an absolute distance ceiling.
  explicit ExternalProvider(const EmbeddingStore& store, double scale = 4.0)
      : store_(&store), scale_(scale) {}
  std::size_t dimension() const override { return store_->dimension(); }
  double distance_scale() const override { return scale_; }
  double default_visual_gate() const override { return scale_; }
  Embedding embed(const Image* frame_image, const Detection& det) const override;

 private:
  const EmbeddingStore* store_;
  double scale_;
};

// Batch-hard triplet loss. groups[k][t] is sample t of identity k; all groups
// must be the same size. For every sample as anchor, the hardest positive is
// the farthest sample of the same identity (the anchor itself included) and
// the hardest negative the nearest sample of any other identity; each anchor
// contributes max(0, margin + d_pos - d_neg) and the contributions are summed.
double triplet_loss(const std::vector<std::vector<Embedding>>& groups,
                    double margin = 2.0);

}  // namespace soctrack
