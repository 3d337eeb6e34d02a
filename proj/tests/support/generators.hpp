#pragma once

#include <utility>
#include <vector>

#include "soctrack/assignment.hpp"
#include "soctrack/geometry.hpp"
#include "soctrack/metrics.hpp"
#include "soctrack/rng.hpp"

// Random instances shared by unit tests and the acceptance gate. Everything
// lives on an integer grid so reference comparisons stay exact.
namespace soctrack::testgen {

inline CostMatrix random_cost_matrix(Rng& rng, std::size_t max_dim = 7) {
  const std::size_t rows = rng.uniform_index(max_dim + 1);
  const std::size_t cols = rng.uniform_index(max_dim + 1);
  CostMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (rng.uniform() < 0.25) {
        m.forbid(r, c);
      } else {
        m.set(r, c, static_cast<double>(rng.uniform_index(21)));
      }
    }
  }
  return m;
}

inline BBox random_grid_box(Rng& rng, int span = 30, int min_size = 3,
                            int max_size = 10) {
  const int w = min_size + static_cast<int>(rng.uniform_index(max_size - min_size + 1));
  const int h = min_size + static_cast<int>(rng.uniform_index(max_size - min_size + 1));
  const int x = static_cast<int>(rng.uniform_index(span - w + 1));
  const int y = static_cast<int>(rng.uniform_index(span - h + 1));
  return BBox(x, y, x + w, y + h);
}

// Integer jitter in [-radius, radius] per axis.
inline BBox jitter_grid_box(const BBox& b, Rng& rng, int radius = 2) {
  const int dx = static_cast<int>(rng.uniform_index(2 * radius + 1)) - radius;
  const int dy = static_cast<int>(rng.uniform_index(2 * radius + 1)) - radius;
  return BBox(b.x_min() + dx, b.y_min() + dy, b.x_max() + dx, b.y_max() + dy);
}

struct MicroSequence {
  IdFrames gt;
  IdFrames hyp;
};

// Short tracking episodes with correlated hypotheses: boxes follow the truth
// with jitter, identities occasionally remap, spurious and missing boxes
// appear. Ids stay ascending within each frame.
inline MicroSequence random_micro_sequence(Rng& rng, int max_frames = 5,
                                           int max_ids = 3) {
  MicroSequence seq;
  const int frames = 1 + static_cast<int>(rng.uniform_index(max_frames));
  const int ids = 1 + static_cast<int>(rng.uniform_index(max_ids));

  for (int f = 1; f <= frames; ++f) {
    std::vector<IdBox> gts;
    for (long id = 1; id <= ids; ++id) {
      if (rng.uniform() < 0.75) gts.push_back(IdBox{id, random_grid_box(rng)});
    }
    std::vector<IdBox> hyps;
    std::vector<char> hyp_used(static_cast<std::size_t>(max_ids) + 1, 0);
    for (const IdBox& g : gts) {
      if (rng.uniform() < 0.8) {
        long hid = g.id;
        if (rng.uniform() < 0.25) {
          hid = 1 + static_cast<long>(rng.uniform_index(max_ids));
        }
        if (hyp_used[hid]) continue;
        hyp_used[hid] = 1;
        hyps.push_back(IdBox{hid, jitter_grid_box(g.bbox, rng)});
      }
    }
    for (long id = 1; id <= ids; ++id) {
      if (!hyp_used[id] && rng.uniform() < 0.2) {
        hyp_used[id] = 1;
        hyps.push_back(IdBox{id, random_grid_box(rng)});
      }
    }
    std::sort(hyps.begin(), hyps.end(),
              [](const IdBox& a, const IdBox& b) { return a.id < b.id; });
    if (!gts.empty()) seq.gt[f] = std::move(gts);
    if (!hyps.empty()) seq.hyp[f] = std::move(hyps);
  }
  return seq;
}

}  // namespace soctrack::testgen
