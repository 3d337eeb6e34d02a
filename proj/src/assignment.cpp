#include "soctrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace soctrack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest-augmenting-path solver for a dense square LAP (all entries finite).
// Returns row -> col and, through u/v, an optimal dual: u[i] + v[j] <= c(i,j)
// everywhere with equality on matched cells. Internals are 1-based, as usual
// for this formulation.
std::vector<int> solve_square(const std::vector<double>& cost, int n,
                              std::vector<double>& u, std::vector<double>& v) {
  u.assign(n + 1, 0.0);
  v.assign(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row2col(n, -1);
  for (int j = 1; j <= n; ++j) row2col[match[j] - 1] = j - 1;
  return row2col;
}

bool kuhn_augment(int row, const std::vector<std::vector<int>>& adj,
                  const std::vector<char>& col_ok, std::vector<char>& visited,
                  std::vector<int>& col_match) {
  for (int c : adj[row]) {
    if (!col_ok[c] || visited[c]) continue;
    visited[c] = 1;
    if (col_match[c] < 0 ||
        kuhn_augment(col_match[c], adj, col_ok, visited, col_match)) {
      col_match[c] = row;
      return true;
    }
  }
  return false;
}

// True when every admissible row can be matched inside the given graph;
// row2col then holds one such matching.
bool perfect_matching(int n, const std::vector<std::vector<int>>& adj,
                      const std::vector<char>& row_ok,
                      const std::vector<char>& col_ok,
                      std::vector<int>& row2col) {
  std::vector<int> col_match(n, -1);
  for (int r = 0; r < n; ++r) {
    if (!row_ok[r]) continue;
    std::vector<char> visited(n, 0);
    if (!kuhn_augment(r, adj, col_ok, visited, col_match)) return false;
  }
  row2col.assign(n, -1);
  for (int c = 0; c < n; ++c) {
    if (col_match[c] >= 0) row2col[col_match[c]] = c;
  }
  return true;
}

}  // namespace

// The matrix is padded to a square of side max(R, C) with zero-cost dummy
// rows or columns on the short side, and FORBIDDEN cells priced above any
// spread of finite entries. Since dummies are scarce, a real pair can only be
// dropped by routing some row through a FORBIDDEN price, so maximum
// cardinality is forced before cost is minimized. The lexicographic tie-break
// then works on the optimal-dual tight cells: every minimum-cost assignment is
// a perfect matching of tight cells and vice versa, so rows are pinned in
// order to their smallest real column that still admits a perfect completion.
Assignment solve_assignment(const CostMatrix& m) {
  Assignment out;
  const std::size_t R = m.rows(), C = m.cols();
  if (R == 0 || C == 0) return out;

  double abs_sum = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      const double v = m.at(r, c);
      if (std::isnan(v) || v == -kInf) {
        throw std::invalid_argument("solve_assignment: cost must be finite or FORBIDDEN");
      }
      if (v != kInf) abs_sum += std::abs(v);
    }
  }
  const double big = 2.0 * abs_sum + 1.0;

  const int n = static_cast<int>(std::max(R, C));
  std::vector<double> cost(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < static_cast<int>(R); ++i) {
    for (int j = 0; j < static_cast<int>(C); ++j) {
      cost[static_cast<std::size_t>(i) * n + j] =
          m.is_forbidden(i, j) ? big : m.at(i, j);
    }
  }

  std::vector<double> u, v;
  std::vector<int> base = solve_square(cost, n, u, v);

  // Tight cells w.r.t. the optimal dual. Integer-valued inputs keep the duals
  // exact, so the tolerance only matters for generic real costs where it
  // merges indistinguishable near-ties.
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double cv = cost[static_cast<std::size_t>(i) * n + j];
      const double slack = cv - u[i + 1] - v[j + 1];
      const double tol = 1e-9 * std::max({1.0, std::abs(cv), std::abs(u[i + 1]), std::abs(v[j + 1])});
      if (slack <= tol) adj[i].push_back(j);
    }
  }

  std::vector<char> row_ok(n, 1), col_ok(n, 1);
  std::vector<int> cur = base;

  for (int r = 0; r < static_cast<int>(R); ++r) {
    int chosen = -1;
    for (int c : adj[r]) {
      if (c >= static_cast<int>(C)) break;  // adj is ascending; dummies follow real cols
      if (!col_ok[c] || m.is_forbidden(r, c)) continue;
      if (cur[r] == c) {
        chosen = c;
        break;
      }
      // Probe: does pinning (r, c) still admit a perfect tight completion?
      row_ok[r] = 0;
      col_ok[c] = 0;
      std::vector<int> completion;
      const bool ok = perfect_matching(n, adj, row_ok, col_ok, completion);
      row_ok[r] = 1;
      col_ok[c] = 1;
      if (ok) {
        chosen = c;
        cur = completion;
        cur[r] = c;
        break;
      }
    }
    if (chosen >= 0) {
      row_ok[r] = 0;
      col_ok[chosen] = 0;
      out.pairs.emplace_back(static_cast<std::size_t>(r),
                             static_cast<std::size_t>(chosen));
    }
    // Otherwise the row stays unmatched: any remaining completion routes it
    // through a dummy or forbidden column, so nothing is pinned.
  }

  out.total_cost = 0.0;
  for (const auto& [r, c] : out.pairs) out.total_cost += m.at(r, c);
  return out;
}

CostMatrix gated_costs(const CostMatrix& costs,
                       const std::function<bool(std::size_t, std::size_t)>& admit) {
  CostMatrix out = costs;
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    for (std::size_t c = 0; c < costs.cols(); ++c) {
      if (!costs.is_forbidden(r, c) && !admit(r, c)) out.forbid(r, c);
    }
  }
  return out;
}

}  // namespace soctrack
