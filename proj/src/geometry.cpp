#include "tnt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace tnt {
namespace {

// Hartley normalization: centroid to origin, mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(const std::vector<Point2>& pts) {
  double mx = 0.0, my = 0.0;
  for (const Point2& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const Point2& p : pts) mean_dist += std::hypot(p.x - mx, p.y - my);
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 0.0) || !std::isfinite(mean_dist)) {
    fail(ErrorKind::kDegenerateGeometry, "correspondences have no spatial spread");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * mx, 0.0, s, -s * my, 0.0, 0.0, 1.0;
  return t;
}

Eigen::Vector3d homogeneous(const Point2& p) { return {p.x, p.y, 1.0}; }

std::vector<Correspondence> select(const std::vector<Correspondence>& matches,
                                   const std::vector<bool>& mask) {
  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (mask[i]) out.push_back(matches[i]);
  }
  return out;
}

// Flags inliers and returns their count; cost receives the truncated
// quadratic score sum(min(d^2, threshold^2)).
int classify(const FundamentalMatrix& f, const std::vector<Correspondence>& matches,
             double threshold, std::vector<bool>& flags, double& cost) {
  flags.assign(matches.size(), false);
  int count = 0;
  cost = 0.0;
  const double cap = threshold * threshold;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const double d = sampson_distance(f, matches[i]);
    cost += std::min(d * d, cap);
    if (d <= threshold) {
      flags[i] = true;
      ++count;
    }
  }
  return count;
}

// Iterations needed to draw one all-inlier sample with the given confidence.
int adaptive_iterations(double inlier_ratio, int sample_size, double confidence) {
  const double p_good = std::pow(inlier_ratio, sample_size);
  if (p_good >= 1.0) return 1;
  if (p_good <= 0.0) return std::numeric_limits<int>::max();
  const double n = std::log(1.0 - confidence) / std::log(1.0 - p_good);
  if (!std::isfinite(n) || n > 1e9) return std::numeric_limits<int>::max();
  return std::max(1, static_cast<int>(std::ceil(n)));
}

}  // namespace

FundamentalMatrix FundamentalMatrix::from_matrix(const Eigen::Matrix3d& raw) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svd.singularValues();
  s(2) = 0.0;
  Eigen::Matrix3d m = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  const double norm = m.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    fail(ErrorKind::kDegenerateGeometry, "fundamental matrix has zero rank-2 part");
  }
  return FundamentalMatrix{m / norm};
}

void RansacConfig::validate() const {
  if (max_iterations < 1) fail(ErrorKind::kConfig, "ransac.max_iterations must be >= 1");
  if (!(inlier_threshold > 0.0)) fail(ErrorKind::kConfig, "ransac.inlier_threshold must be > 0");
  if (min_inlier_fraction < 0.0 || min_inlier_fraction > 1.0) {
    fail(ErrorKind::kConfig, "ransac.min_inlier_fraction must be in [0,1]");
  }
}

FundamentalMatrix eight_point(const std::vector<Correspondence>& matches) {
  if (matches.size() < 8) {
    fail(ErrorKind::kInsufficientData,
         "8-point needs at least 8 correspondences, got " + std::to_string(matches.size()));
  }
  std::vector<Point2> p1, p2;
  p1.reserve(matches.size());
  p2.reserve(matches.size());
  for (const Correspondence& c : matches) {
    p1.push_back(c.p1);
    p2.push_back(c.p2);
  }
  const Eigen::Matrix3d t1 = normalizing_transform(p1);
  const Eigen::Matrix3d t2 = normalizing_transform(p2);

  Eigen::MatrixXd a(static_cast<Eigen::Index>(matches.size()), 9);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const Eigen::Vector3d x = t1 * homogeneous(p1[i]);
    const Eigen::Vector3d xp = t2 * homogeneous(p2[i]);
    a.row(static_cast<Eigen::Index>(i)) << xp(0) * x(0), xp(0) * x(1), xp(0), xp(1) * x(0),
        xp(1) * x(1), xp(1), x(0), x(1), 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd f = svd.matrixV().col(8);
  Eigen::Matrix3d fn;
  fn << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);
  // Rank-2 projection in normalized coordinates, then undo the normalization.
  const FundamentalMatrix projected = FundamentalMatrix::from_matrix(fn);
  return FundamentalMatrix::from_matrix(t2.transpose() * projected.m * t1);
}

double sampson_distance(const FundamentalMatrix& f, const Correspondence& c) {
  const Eigen::Vector3d x = homogeneous(c.p1);
  const Eigen::Vector3d xp = homogeneous(c.p2);
  const Eigen::Vector3d fx = f.m * x;
  const Eigen::Vector3d ftxp = f.m.transpose() * xp;
  const double num = xp.dot(fx);
  const double den = fx(0) * fx(0) + fx(1) * fx(1) + ftxp(0) * ftxp(0) + ftxp(1) * ftxp(1);
  if (den <= 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(num) / std::sqrt(den);
}

FundamentalEstimate estimate_fundamental(const std::vector<Correspondence>& matches,
                                         const RansacConfig& cfg) {
  cfg.validate();
  if (matches.size() < 8) {
    fail(ErrorKind::kInsufficientData,
         "need at least 8 correspondences, got " + std::to_string(matches.size()));
  }
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = matches.size();
  std::vector<std::size_t> pool(n);

  FundamentalEstimate best;
  best.inlier_count = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  double cost = 0.0;
  std::vector<bool> flags;
  std::vector<Correspondence> sample(8);
  int needed = cfg.max_iterations;
  for (int it = 0; it < std::min(needed, cfg.max_iterations); ++it) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t k = 0; k < 8; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(pool[k], pool[pick(rng)]);
      sample[k] = matches[pool[k]];
    }
    FundamentalMatrix candidate;
    try {
      candidate = eight_point(sample);
    } catch (const Error&) {
      continue;
    }
    const int count = classify(candidate, matches, cfg.inlier_threshold, flags, cost);
    if (cost < best_cost) {
      best.f = candidate;
      best.inliers = flags;
      best.inlier_count = count;
      best_cost = cost;
      needed = adaptive_iterations(static_cast<double>(count) / static_cast<double>(n), 8, 0.99999);
    }
  }
  if (best.inlier_count < 8) {
    fail(ErrorKind::kDegenerateGeometry, "no RANSAC sample reached an 8-point consensus");
  }

  // Refit on the consensus set until it stops changing.
  for (int round = 0; round < 5; ++round) {
    FundamentalMatrix refit;
    try {
      refit = eight_point(select(matches, best.inliers));
    } catch (const Error&) {
      break;
    }
    const int count = classify(refit, matches, cfg.inlier_threshold, flags, cost);
    if (cost > best_cost) break;
    const bool same = flags == best.inliers;
    best.f = refit;
    best.inliers = flags;
    best.inlier_count = count;
    best_cost = cost;
    if (same) break;
  }

  const double fraction = static_cast<double>(best.inlier_count) / static_cast<double>(n);
  if (fraction < cfg.min_inlier_fraction) {
    fail(ErrorKind::kDegenerateGeometry,
         "RANSAC consensus " + std::to_string(fraction) + " below min_inlier_fraction");
  }
  return best;
}

Eigen::Vector3d epipolar_line(const FundamentalMatrix& f, const Point2& p) {
  Eigen::Vector3d l = f.m * homogeneous(p);
  const double n = std::hypot(l(0), l(1));
  if (!(n > 0.0) || !std::isfinite(n)) {
    fail(ErrorKind::kDegenerateLine, "epipolar line vanishes at the epipole");
  }
  return l / n;
}

double line_distance(const Eigen::Vector3d& line, const Point2& p) {
  return line(0) * p.x + line(1) * p.y + line(2);
}

namespace {

// Rows (coefficients over [left, top, right, bottom], constant) of the
// linear residuals minimized by predict_box, excluding the regularizer.
struct LinearResidual {
  Eigen::Vector4d a;
  double c;
};

std::vector<LinearResidual> box_residuals(const BoundingBox& box_t, const FundamentalMatrix& f) {
  // Corner i of the unknown box picks (x, y) from the parameter vector.
  static constexpr int kXIndex[4] = {0, 2, 2, 0};
  static constexpr int kYIndex[4] = {1, 1, 3, 3};
  std::vector<LinearResidual> rows;
  const Corners corners = to_corners(box_t);
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector3d l;
    try {
      l = epipolar_line(f, corners[static_cast<std::size_t>(i)]);
    } catch (const Error&) {
      continue;  // corner sits on the epipole and constrains nothing
    }
    LinearResidual r{Eigen::Vector4d::Zero(), l(2)};
    r.a(kXIndex[i]) += l(0);
    r.a(kYIndex[i]) += l(1);
    rows.push_back(r);
  }
  rows.push_back({Eigen::Vector4d(-1.0, 0.0, 1.0, 0.0), -box_t.w});
  rows.push_back({Eigen::Vector4d(0.0, -1.0, 0.0, 1.0), -box_t.h});
  return rows;
}

Eigen::Vector4d box_params(const BoundingBox& b) {
  return {b.left(), b.top(), b.right(), b.bottom()};
}

}  // namespace

BoundingBox predict_box(const BoundingBox& box_t, const FundamentalMatrix& f, double reg_weight) {
  if (!(reg_weight >= 0.0)) fail(ErrorKind::kInvalidArgument, "reg_weight must be >= 0");
  const Eigen::Vector4d q_t = box_params(box_t);
  Eigen::Matrix4d normal = reg_weight * Eigen::Matrix4d::Identity();
  Eigen::Vector4d rhs = reg_weight * q_t;
  for (const LinearResidual& r : box_residuals(box_t, f)) {
    normal += r.a * r.a.transpose();
    rhs -= r.a * r.c;
  }
  Eigen::FullPivLU<Eigen::Matrix4d> lu(normal);
  lu.setThreshold(1e-12);
  if (lu.rank() < 4) {
    fail(ErrorKind::kRankDeficient, "epipolar box system is rank deficient");
  }
  const Eigen::Vector4d q = lu.solve(rhs);
  if (!(q(2) > q(0)) || !(q(3) > q(1)) || !q.allFinite()) {
    fail(ErrorKind::kCollapse, "predicted box has non-positive size");
  }
  return BoundingBox{0.5 * (q(0) + q(2)), 0.5 * (q(1) + q(3)), q(2) - q(0), q(3) - q(1)};
}

double predict_box_cost(const BoundingBox& box_t, const FundamentalMatrix& f, double reg_weight,
                        const BoundingBox& candidate) {
  const Eigen::Vector4d q = box_params(candidate);
  double cost = reg_weight * (q - box_params(box_t)).squaredNorm();
  for (const LinearResidual& r : box_residuals(box_t, f)) {
    const double e = r.a.dot(q) + r.c;
    cost += e * e;
  }
  return cost;
}

}  // namespace tnt
