#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tnt/core.hpp"

namespace tnt {

struct Correspondence {
  Point2 p1;  // frame t
  Point2 p2;  // frame t + 1
};

// Rank-2, unit-Frobenius fundamental matrix with x_{t+1}^T F x_t = 0.
struct FundamentalMatrix {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();

  // Projects an arbitrary 3x3 matrix onto the invariants (rank 2 via SVD,
  // unit Frobenius norm).
  static FundamentalMatrix from_matrix(const Eigen::Matrix3d& raw);
};

struct RansacConfig {
  int max_iterations = 500;
  double inlier_threshold = 1.0;  // Sampson distance, pixels
  double min_inlier_fraction = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FundamentalEstimate {
  FundamentalMatrix f;
  std::vector<bool> inliers;
  int inlier_count = 0;
};

// Unnormalized 8-point least squares on exactly the given matches, with
// isotropic normalization of both point sets. Needs >= 8 matches.
FundamentalMatrix eight_point(const std::vector<Correspondence>& matches);

// First-order geometric epipolar error, in pixels.
double sampson_distance(const FundamentalMatrix& f, const Correspondence& c);

// RANSAC over 8-point minimal samples scored by truncated quadratic Sampson
// error, refit on the best consensus set.
FundamentalEstimate estimate_fundamental(const std::vector<Correspondence>& matches,
                                         const RansacConfig& cfg);

// Line (a, b, c) in frame t+1 with a^2 + b^2 = 1 on which matches of p lie.
Eigen::Vector3d epipolar_line(const FundamentalMatrix& f, const Point2& p);

// Signed distance in pixels from p to a unit-normal line.
double line_distance(const Eigen::Vector3d& line, const Point2& p);

// Epipolar box prediction: least-squares box in frame t+1 whose corners lie
// on the epipolar lines of box_t's corners while the main diagonal keeps
// box_t's extent, plus a Tikhonov pull of weight reg_weight toward box_t.
// Throws kCollapse if the solved box has non-positive size and
// kRankDeficient if the normal matrix is singular.
BoundingBox predict_box(const BoundingBox& box_t, const FundamentalMatrix& f,
                        double reg_weight = 1e-2);

// Value of the cost predict_box minimizes, evaluated at candidate.
double predict_box_cost(const BoundingBox& box_t, const FundamentalMatrix& f,
                        double reg_weight, const BoundingBox& candidate);

}  // namespace tnt
