#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "soctrack/embedding.hpp"
#include "soctrack/errors.hpp"

using namespace soctrack;

namespace {

Embedding emb(std::vector<double> v) { return Embedding{std::move(v)}; }

}  // namespace

TEST_CASE("visual_distance is plain L2") {
  CHECK(visual_distance(emb({1, 2, 3}), emb({1, 2, 3})) == 0.0);
  CHECK(visual_distance(emb({0, 0}), emb({3, 4})) == 5.0);
  CHECK(visual_distance(emb({1}), emb({-1})) == 2.0);
  CHECK_THROWS_AS(visual_distance(emb({1, 2}), emb({1, 2, 3})),
                  DimensionMismatchError);
}

TEST_CASE("embed_histogram puts a flat patch into a single bin") {
  Image img(16, 16, Rgb{200, 30, 30});
  const Embedding e = embed_histogram(img, BBox(2, 2, 10, 10));
  CHECK(e.dim() == 8 * 8 * 4);
  double sum_sq = 0.0;
  int nonzero = 0;
  for (double v : e.values) {
    sum_sq += v * v;
    if (v != 0.0) ++nonzero;
  }
  CHECK(nonzero == 1);
  CHECK(sum_sq == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("embed_histogram distances") {
  Image red(16, 16, Rgb{220, 20, 20});
  Image blue(16, 16, Rgb{20, 20, 220});
  const BBox box(0, 0, 16, 16);

  // Same colors in different images: identical histograms.
  CHECK(visual_distance(embed_histogram(red, box), embed_histogram(red, box)) ==
        0.0);
  // Disjoint single-bin histograms are as far apart as unit vectors get.
  CHECK(visual_distance(embed_histogram(red, box), embed_histogram(blue, box)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("embed_histogram rejects boxes covering no pixel") {
  Image img(16, 16);
  CHECK_THROWS_AS(embed_histogram(img, BBox(20, 20, 25, 25)), DegenerateBoxError);
  CHECK_THROWS_AS(embed_histogram(img, BBox(-5, -5, -1, -1)), DegenerateBoxError);
}

TEST_CASE("EmbeddingStore insert, lookup and invariants") {
  EmbeddingStore store;
  store.insert(1, 0, emb({1, 0}));
  store.insert(1, 1, emb({0, 1}));
  CHECK(store.size() == 2);
  CHECK(store.dimension() == 2);
  CHECK(store.contains(1, 0));
  CHECK_FALSE(store.contains(2, 0));
  CHECK(store.lookup(1, 1).values == std::vector<double>{0, 1});
  CHECK_THROWS_AS(store.lookup(2, 0), MissingKeyError);
  CHECK_THROWS_AS(store.insert(2, 0, emb({1, 2, 3})), DimensionMismatchError);
  CHECK_THROWS_AS(store.insert(1, 0, emb({5, 5})), ParseError);
}

TEST_CASE("load_external_embeddings round trip and malformed rows") {
  const std::string path = "soctrack_test_emb.csv";
  {
    std::ofstream out(path);
    out << "1,0,0.25,0.5\n";
    out << "1,1,1.0,0.0\n";
    out << "\n";  // blank lines are skipped
    out << "2,0,0.125,0.375\n";
  }
  const EmbeddingStore store = load_external_embeddings(path);
  std::remove(path.c_str());
  CHECK(store.size() == 3);
  CHECK(store.dimension() == 2);
  CHECK(store.lookup(1, 0).values == std::vector<double>{0.25, 0.5});
  CHECK(store.lookup(2, 0).values == std::vector<double>{0.125, 0.375});

  {
    std::ofstream out(path);
    out << "1,0,0.25,0.5\n";
    out << "1,1,1.0\n";  // dimension changes mid-file
  }
  CHECK_THROWS_AS(load_external_embeddings(path), DimensionMismatchError);
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "1,zero,0.25,0.5\n";
  }
  CHECK_THROWS_AS(load_external_embeddings(path), ParseError);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_external_embeddings("missing_file.csv"), ParseError);
}

TEST_CASE("providers expose their distance scale and gate") {
  const HistogramProvider hist;
  CHECK(hist.dimension() == 8 * 8 * 4);
  CHECK(hist.distance_scale() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(hist.default_visual_gate() ==
        doctest::Approx(0.8 * std::sqrt(2.0)).epsilon(1e-12));

  EmbeddingStore store;
  store.insert(1, 0, emb({1, 2, 3}));
  const ExternalProvider ext(store, 4.0);
  CHECK(ext.dimension() == 3);
  CHECK(ext.distance_scale() == 4.0);
  CHECK(ext.default_visual_gate() == 4.0);

  // External lookup goes through the detection's key.
  const Detection keyed(1, BBox(0, 0, 4, 4), 0.9, EmbeddingKey{1, 0});
  CHECK(ext.embed(nullptr, keyed).values == std::vector<double>{1, 2, 3});
  const Detection unkeyed(1, BBox(0, 0, 4, 4), 0.9);
  CHECK_THROWS_AS(ext.embed(nullptr, unkeyed), MissingKeyError);
  const Detection absent(2, BBox(0, 0, 4, 4), 0.9, EmbeddingKey{2, 0});
  CHECK_THROWS_AS(ext.embed(nullptr, absent), MissingKeyError);

  // Histogram provider needs pixels.
  Image img(16, 16, Rgb{200, 30, 30});
  const Embedding e = hist.embed(&img, Detection(1, BBox(0, 0, 8, 8), 0.9));
  CHECK(e.dim() == 8 * 8 * 4);
  CHECK_THROWS_AS(hist.embed(nullptr, Detection(1, BBox(0, 0, 8, 8), 0.9)),
                  std::invalid_argument);
}

TEST_CASE("triplet_loss closed forms") {
  // All samples identical: every anchor contributes exactly the margin.
  std::vector<std::vector<Embedding>> same = {
      {emb({1, 1}), emb({1, 1})},
      {emb({1, 1}), emb({1, 1})},
  };
  CHECK(triplet_loss(same, 2.0) == 2.0 * 2 * 2);
  CHECK(triplet_loss(same, 0.5) == 0.5 * 2 * 2);

  // Tight clusters far apart: loss hits zero.
  std::vector<std::vector<Embedding>> split = {
      {emb({0, 0}), emb({0.1, 0})},
      {emb({100, 0}), emb({100.1, 0})},
  };
  CHECK(triplet_loss(split, 2.0) == 0.0);

  // 1-D hand case: identities at {0, 1} and {2, 3}, margin 2. Per anchor the
  // hinge values are 1, 2, 2, 1 (e.g. anchor 1: d_pos 1, d_neg 1 -> 2).
  std::vector<std::vector<Embedding>> hand = {
      {emb({0}), emb({1})},
      {emb({2}), emb({3})},
  };
  CHECK(triplet_loss(hand, 2.0) == 6.0);
}

TEST_CASE("triplet_loss validates its input") {
  CHECK_THROWS_AS(triplet_loss({{emb({1})}}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(triplet_loss({}, 2.0), std::invalid_argument);
  std::vector<std::vector<Embedding>> ragged = {
      {emb({0}), emb({1})},
      {emb({3})},
  };
  CHECK_THROWS_AS(triplet_loss(ragged, 2.0), std::invalid_argument);
  std::vector<std::vector<Embedding>> mixed_dim = {
      {emb({0}), emb({1})},
      {emb({3, 0}), emb({5, 0})},
  };
  CHECK_THROWS_AS(triplet_loss(mixed_dim, 2.0), DimensionMismatchError);
}
