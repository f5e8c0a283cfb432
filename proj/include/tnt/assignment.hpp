#pragma once

#include <vector>

#include <Eigen/Core>

namespace tnt {

// Minimum-cost one-to-one assignment on a rectangular cost matrix
// (Kuhn-Munkres with potentials, O(n^2 m)). Returns, for every row, the
// assigned column or -1 when rows outnumber columns. Every row is assigned
// when rows <= cols. Rows are inserted in index order, which makes the
// result deterministic for a given matrix.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

// Same, maximizing the total weight.
std::vector<int> solve_max_assignment(const Eigen::MatrixXd& weight);

}  // namespace tnt
