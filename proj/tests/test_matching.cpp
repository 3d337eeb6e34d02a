#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "soctrack/assignment.hpp"
#include "soctrack/rng.hpp"

using namespace soctrack;

namespace {

CostMatrix matrix_of(std::vector<std::vector<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows[0].size() : 0;
  CostMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) m.set(i, j, rows[i][j]);
  }
  return m;
}

}  // namespace

TEST_CASE("solve_assignment prefers the cheaper permutation") {
  const Assignment a = solve_assignment(matrix_of({{1, 2}, {2, 4}}));
  REQUIRE(a.pairs.size() == 2);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(a.pairs[1] == std::pair<std::size_t, std::size_t>{1, 0});
  CHECK(a.total_cost == 4.0);
}

TEST_CASE("solve_assignment zero diagonal") {
  const Assignment a = solve_assignment(matrix_of({{0, 9}, {9, 0}}));
  REQUIRE(a.pairs.size() == 2);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(a.pairs[1] == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(a.total_cost == 0.0);
}

TEST_CASE("solve_assignment rectangular picks the minimum") {
  const Assignment a = solve_assignment(matrix_of({{5, 2, 7}}));
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(a.total_cost == 2.0);
}

TEST_CASE("solve_assignment empty and degenerate shapes") {
  CHECK(solve_assignment(CostMatrix(0, 0)).pairs.empty());
  CHECK(solve_assignment(CostMatrix(3, 0)).pairs.empty());
  CHECK(solve_assignment(CostMatrix(0, 3)).pairs.empty());

  CostMatrix all_forbidden(2, 2);
  all_forbidden.forbid(0, 0);
  all_forbidden.forbid(0, 1);
  all_forbidden.forbid(1, 0);
  all_forbidden.forbid(1, 1);
  CHECK(solve_assignment(all_forbidden).pairs.empty());
}

TEST_CASE("solve_assignment maximizes cardinality before cost") {
  // Dropping row 1 would be cheaper (cost 5 for one pair) but loses a match.
  CostMatrix m(2, 2);
  m.set(0, 0, 0.0);
  m.set(0, 1, 5.0);
  m.forbid(1, 0);
  m.set(1, 1, 5.0);
  const Assignment a = solve_assignment(m);
  REQUIRE(a.pairs.size() == 2);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(a.pairs[1] == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(a.total_cost == 5.0);
}

TEST_CASE("solve_assignment breaks cost ties lexicographically") {
  const Assignment a = solve_assignment(matrix_of({{1, 1}, {1, 1}}));
  REQUIRE(a.pairs.size() == 2);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(a.pairs[1] == std::pair<std::size_t, std::size_t>{1, 1});

  // (0,1)+(1,0) and (0,0)+(1,1) both cost 7; the lexicographically smaller
  // pair list wins.
  const Assignment b = solve_assignment(matrix_of({{3, 2}, {5, 4}}));
  REQUIRE(b.pairs.size() == 2);
  CHECK(b.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(b.pairs[1] == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(b.total_cost == 7.0);
}

TEST_CASE("solve_assignment rejects NaN costs") {
  CostMatrix m(1, 1);
  m.set(0, 0, std::nan(""));
  CHECK_THROWS_AS(solve_assignment(m), std::invalid_argument);
}

TEST_CASE("gated_costs forbids failing entries and keeps the rest") {
  CostMatrix m = matrix_of({{1, 2}, {3, 4}});
  m.forbid(1, 0);
  const CostMatrix gated = gated_costs(
      m, [&m](std::size_t r, std::size_t c) { return m.at(r, c) < 4.0; });
  CHECK(gated.at(0, 0) == 1.0);
  CHECK(gated.at(0, 1) == 2.0);
  CHECK(gated.is_forbidden(1, 0));  // pre-existing FORBIDDEN survives
  CHECK(gated.is_forbidden(1, 1));  // gate removed it

  const CostMatrix same = gated_costs(
      m, [](std::size_t, std::size_t) { return true; });
  CHECK(same.at(0, 0) == 1.0);
  CHECK(same.is_forbidden(1, 0));
}

TEST_CASE("solve_assignment agrees with brute force on random matrices") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const CostMatrix m = testgen::random_cost_matrix(rng);
    const Assignment fast = solve_assignment(m);
    const Assignment slow = oracle::brute_force_assignment(m);
    REQUIRE(fast.pairs.size() == slow.pairs.size());
    CHECK(fast.total_cost == slow.total_cost);
    CHECK(fast.pairs == slow.pairs);
  }
}
