#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace soctrack {

// Dense rectangular cost matrix. FORBIDDEN entries (+infinity) mark pairs the
// solver must never select.
class CostMatrix {
 public:
  static constexpr double kForbidden = std::numeric_limits<double>::infinity();

  CostMatrix(std::size_t rows, std::size_t cols, double init = 0.0)
      : rows_(rows), cols_(cols), cells_(rows * cols, init) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, double v) { cells_[r * cols_ + c] = v; }
  void forbid(std::size_t r, std::size_t c) { set(r, c, kForbidden); }
  bool is_forbidden(std::size_t r, std::size_t c) const {
    return at(r, c) == kForbidden;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> cells_;
};

struct Assignment {
  // (row, col) pairs sorted by row; rows and cols each appear at most once and
  // no pair is FORBIDDEN.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_cost = 0.0;
};

// Exact minimum-cost assignment. Among all assignments it maximizes the number
// of matched pairs first, minimizes total cost second, and of the remaining
// ties returns the lexicographically smallest pair list, which makes the
// result independent of internal iteration order.
Assignment solve_assignment(const CostMatrix& costs);

// Copy of `costs` with every entry rejected by `admit` replaced by FORBIDDEN.
// Entries that are already FORBIDDEN stay FORBIDDEN.
CostMatrix gated_costs(const CostMatrix& costs,
                       const std::function<bool(std::size_t, std::size_t)>& admit);

}  // namespace soctrack
