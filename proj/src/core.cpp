#include "tnt/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "tnt/simd.hpp"

namespace tnt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::kDegenerateLine: return "degenerate-line";
    case ErrorKind::kCollapse: return "collapse";
    case ErrorKind::kRankDeficient: return "rank-deficiency";
    case ErrorKind::kDegenerateFeature: return "degenerate-feature";
    case ErrorKind::kAssembly: return "assembly";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kCoverage: return "coverage";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kUndefinedMetric: return "undefined-metric";
    case ErrorKind::kFeasibility: return "feasibility";
    case ErrorKind::kSamplerExhausted: return "sampler-exhausted";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

bool BoundingBox::valid() const {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) &&
         w > 0.0 && h > 0.0;
}

BoundingBox BoundingBox::from_ltwh(double left, double top, double width, double height) {
  return {left + 0.5 * width, top + 0.5 * height, width, height};
}

double AppearanceFeature::norm() const {
  return std::sqrt(simd::dot<double>(values, values));
}

const Detection& Tracklet::at_frame(int frame) const {
  const int offset = frame - first_frame();
  if (offset < 0 || offset >= length()) {
    fail(ErrorKind::kInvalidArgument,
         "tracklet " + std::to_string(id) + " has no detection at frame " + std::to_string(frame));
  }
  return detections[static_cast<std::size_t>(offset)];
}

void Tracklet::validate() const {
  if (detections.empty()) {
    fail(ErrorKind::kInvalidArgument, "tracklet " + std::to_string(id) + " is empty");
  }
  const std::size_t dim = detections.front().feature.size();
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& d = detections[i];
    if (d.frame < 0 || !d.box.valid()) {
      fail(ErrorKind::kInvalidArgument,
           "tracklet " + std::to_string(id) + " holds an invalid detection");
    }
    if (i > 0 && d.frame != detections[i - 1].frame + 1) {
      fail(ErrorKind::kInvalidArgument,
           "tracklet " + std::to_string(id) + " is not frame-consecutive");
    }
    if (d.feature.size() != dim) {
      fail(ErrorKind::kInvalidArgument,
           "tracklet " + std::to_string(id) + " mixes feature lengths");
    }
  }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Corners to_corners(const BoundingBox& b) {
  const double l = b.left(), t = b.top(), r = b.right(), btm = b.bottom();
  return {Point2{l, t}, Point2{r, t}, Point2{r, btm}, Point2{l, btm}};
}

BoundingBox from_corners(const Corners& c) {
  const double l = c[0].x, t = c[0].y, r = c[2].x, btm = c[2].y;
  return {0.5 * (l + r), 0.5 * (t + btm), r - l, btm - t};
}

BoundingBox normalize_box(const BoundingBox& b, const FrameMeta& meta) {
  const double sx = meta.width, sy = meta.height;
  return {b.cx / sx, b.cy / sy, b.w / sx, b.h / sy};
}

BoundingBox denormalize_box(const BoundingBox& b, const FrameMeta& meta) {
  const double sx = meta.width, sy = meta.height;
  return {b.cx * sx, b.cy * sy, b.w * sx, b.h * sy};
}

double cosine_similarity(const AppearanceFeature& a, const AppearanceFeature& b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::kInvalidArgument, "feature length mismatch: " + std::to_string(a.size()) +
                                          " vs " + std::to_string(b.size()));
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    fail(ErrorKind::kDegenerateFeature, "zero-norm appearance feature");
  }
  const double c = simd::dot<double>(a.values, b.values) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

bool time_overlap(const Tracklet& u, const Tracklet& w) {
  return u.first_frame() <= w.last_frame() && w.first_frame() <= u.last_frame();
}

int time_gap(const Tracklet& u, const Tracklet& w) {
  if (time_overlap(u, w)) return 0;
  return u.last_frame() < w.first_frame() ? w.first_frame() - u.last_frame()
                                          : u.first_frame() - w.last_frame();
}

std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace tnt
