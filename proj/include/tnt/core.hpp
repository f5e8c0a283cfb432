#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "tnt/error.hpp"

namespace tnt {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// Axis-aligned box in center/size form. MOT files use left/top and are
// converted at the IO boundary.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;

  double left() const { return cx - 0.5 * w; }
  double top() const { return cy - 0.5 * h; }
  double right() const { return cx + 0.5 * w; }
  double bottom() const { return cy + 0.5 * h; }
  double area() const { return w * h; }
  bool valid() const;

  static BoundingBox from_ltwh(double left, double top, double width, double height);

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct AppearanceFeature {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double norm() const;

  friend bool operator==(const AppearanceFeature&, const AppearanceFeature&) = default;
};

struct Detection {
  int frame = 0;
  BoundingBox box;
  double confidence = 1.0;
  AppearanceFeature feature;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Consecutive detections of one object: frames increase by exactly one.
struct Tracklet {
  int id = 0;
  std::vector<Detection> detections;

  int first_frame() const { return detections.front().frame; }
  int last_frame() const { return detections.back().frame; }
  int length() const { return static_cast<int>(detections.size()); }
  const Detection& at_frame(int frame) const;

  // Throws kInvalidArgument when the invariants do not hold.
  void validate() const;

  friend bool operator==(const Tracklet&, const Tracklet&) = default;
};

struct FrameMeta {
  int width = 1;
  int height = 1;
  double fps = 25.0;

  bool valid() const { return width > 0 && height > 0; }

  friend bool operator==(const FrameMeta&, const FrameMeta&) = default;
};

struct TrajectoryPoint {
  Detection detection;
  bool interpolated = false;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

// Per-object output of the tracker (and the ground-truth representation).
// At most one point per frame, frames strictly increasing; gaps allowed.
struct Trajectory {
  int object_id = 0;
  std::vector<TrajectoryPoint> points;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

using Corners = std::array<Point2, 4>;

double iou(const BoundingBox& a, const BoundingBox& b);

// Ordered top-left, top-right, bottom-right, bottom-left.
Corners to_corners(const BoundingBox& b);
BoundingBox from_corners(const Corners& corners);

BoundingBox normalize_box(const BoundingBox& b, const FrameMeta& meta);
BoundingBox denormalize_box(const BoundingBox& b, const FrameMeta& meta);

// Throws kDegenerateFeature on a zero-norm input and kInvalidArgument on a
// length mismatch.
double cosine_similarity(const AppearanceFeature& a, const AppearanceFeature& b);

bool time_overlap(const Tracklet& u, const Tracklet& w);
int time_gap(const Tracklet& u, const Tracklet& w);

// Shortest decimal text that reads back to exactly v.
std::string format_real(double v);

}  // namespace tnt
