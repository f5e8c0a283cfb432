#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>

#include "tnt/core.hpp"
#include "tnt/geometry.hpp"

namespace tnt::testing {

using Projection = Eigen::Matrix<double, 3, 4>;

struct Camera {
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d C = Eigen::Vector3d::Zero();

  Projection P() const;
  Point2 project(const Eigen::Vector3d& X) const;
  double depth(const Eigen::Vector3d& X) const;
};

Eigen::Matrix3d intrinsics(double focal, double width, double height);
Eigen::Matrix3d rotation_ypr(double yaw, double pitch, double roll);

// [e']x P' P^+ with e' the image of the first camera centre in the second.
Eigen::Matrix3d fundamental_pinv(const Projection& p1, const Projection& p2);
// K2^-T [t]x R K1^-1 from the relative pose.
Eigen::Matrix3d fundamental_essential(const Camera& a, const Camera& b);

Eigen::Matrix3d unit_frobenius(const Eigen::Matrix3d& m);
// min(|A - B|, |A + B|) after scaling both to unit Frobenius norm.
double sign_aligned_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

struct MotionRange {
  double rotation_deg = 2.0;                       // per axis, uniform +-
  Eigen::Vector3d translation_lo{-1.0, -0.5, -0.5};
  Eigen::Vector3d translation_hi{1.0, 0.5, 0.5};
  double min_baseline = 0.5;  // redraw shorter translations
  double depth_lo = 4.0;      // scene point depth in camera a
  double depth_hi = 20.0;
};

struct TwoViewScene {
  Camera a;
  Camera b;
  Eigen::Matrix3d f;  // oracle, unit Frobenius
  std::vector<Correspondence> matches;
  std::vector<bool> inlier;
};

inline constexpr double kImageWidth = 960.0;
inline constexpr double kImageHeight = 540.0;

// Camera a at the origin looking down +z; camera b displaced per range.
// Outliers are uniform point pairs at least min_outlier_error pixels (Sampson,
// under the oracle F) away from consistency.
TwoViewScene random_two_view(std::mt19937_64& rng, int n_points, double outlier_fraction,
                             const MotionRange& range = {}, double min_outlier_error = 5.0);

// Axis-aligned rectangle in a plane of constant depth in camera a's frame.
struct Rectangle3 {
  Eigen::Vector3d center;
  double half_width = 0.5;
  double half_height = 1.0;
};

// Envelope of the projected rectangle corners.
BoundingBox project_rectangle(const Camera& cam, const Rectangle3& rect);

struct BoxScene {
  TwoViewScene views;
  Rectangle3 rect;
  BoundingBox box_a;  // oracle box in view a
  BoundingBox box_b;  // oracle box in view b
};

// Camera b moved within range and a fronto-parallel rectangle 8 to 14 units
// away that is fully visible in both views, with n_points exact background
// matches.
BoxScene random_box_scene(std::mt19937_64& rng, const MotionRange& range, int n_points = 50);

// Small camera shake: uniform rotation and translation bounds per axis.
MotionRange camera_jitter(double rotation_deg, double translation);

}  // namespace tnt::testing
