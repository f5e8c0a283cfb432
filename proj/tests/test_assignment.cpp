#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "tnt/assignment.hpp"

namespace tnt {
namespace {

// Minimum over all injective row -> column maps (rows <= cols).
double brute_force(const Eigen::MatrixXd& c) {
  std::vector<int> cols(static_cast<std::size_t>(c.cols()));
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (Eigen::Index r = 0; r < c.rows(); ++r) s += c(r, cols[static_cast<std::size_t>(r)]);
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

TEST(Assignment, MaximizesTwoByTwo) {
  Eigen::MatrixXd w(2, 2);
  w << 0.9, 0.7, 0.7, 0.9;
  EXPECT_EQ(solve_max_assignment(w), (std::vector<int>{0, 1}));
}

TEST(Assignment, MatchesBruteForceOnRandomMatrices) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = dim(rng);
    const int cols = rows + dim(rng) - 1;
    Eigen::MatrixXd c(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int k = 0; k < cols; ++k) c(r, k) = u(rng);
    }
    const std::vector<int> a = solve_assignment(c);
    double s = 0;
    std::vector<bool> used(static_cast<std::size_t>(cols), false);
    for (int r = 0; r < rows; ++r) {
      ASSERT_GE(a[static_cast<std::size_t>(r)], 0);
      ASSERT_FALSE(used[static_cast<std::size_t>(a[static_cast<std::size_t>(r)])]);
      used[static_cast<std::size_t>(a[static_cast<std::size_t>(r)])] = true;
      s += c(r, a[static_cast<std::size_t>(r)]);
    }
    EXPECT_NEAR(s, brute_force(c), 1e-9);
  }
}

TEST(Assignment, MoreRowsThanColumnsLeavesRowsUnassigned) {
  Eigen::MatrixXd c(3, 1);
  c << 5, 1, 3;
  EXPECT_EQ(solve_assignment(c), (std::vector<int>{-1, 0, -1}));
}

TEST(Assignment, EmptyMatrix) {
  EXPECT_TRUE(solve_assignment(Eigen::MatrixXd(0, 3)).empty());
  EXPECT_EQ(solve_assignment(Eigen::MatrixXd(2, 0)), (std::vector<int>{-1, -1}));
}

}  // namespace
}  // namespace tnt
