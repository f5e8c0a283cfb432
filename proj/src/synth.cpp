#include "tnt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace tnt {
namespace {

constexpr double kFocal = 600.0;
constexpr double kMaxPrototypeCos = 0.3;
constexpr int kPrototypeTries = 10000;

Eigen::Matrix3d intrinsics(const FrameMeta& f) {
  Eigen::Matrix3d k;
  k << kFocal, 0.0, 0.5 * f.width, 0.0, kFocal, 0.5 * f.height, 0.0, 0.0, 1.0;
  return k;
}

// Camera at center c looking along forward; image y points down as world y.
CameraMatrix look_along(const Eigen::Matrix3d& k, const Eigen::Vector3d& c,
                        const Eigen::Vector3d& forward) {
  const Eigen::Vector3d z = forward.normalized();
  const Eigen::Vector3d x = Eigen::Vector3d(0.0, 1.0, 0.0).cross(z).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  CameraMatrix rt;
  rt.leftCols<3>() = r;
  rt.col(3) = -r * c;
  return k * rt;
}

std::vector<double> random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (double& x : v) {
      x = n(rng);
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
}

struct Target {
  double u, v;    // reference-view image center
  double vu, vv;  // reference-view velocity, px per frame
  double w, h;    // reference-view size, px
  double depth;
};

std::optional<Point2> project(const CameraMatrix& p, const Eigen::Vector3d& x) {
  const Eigen::Vector3d h = p * x.homogeneous();
  if (!(h.z() > 1e-9)) return std::nullopt;
  return Point2{h.x() / h.z(), h.y() / h.z()};
}

}  // namespace

std::string_view to_string(CameraMode mode) {
  switch (mode) {
    case CameraMode::kStatic: return "static";
    case CameraMode::kTranslating: return "translating";
    case CameraMode::kOrbiting: return "orbiting";
  }
  return "static";
}

CameraMode camera_mode_from_string(std::string_view name) {
  if (name == "static") return CameraMode::kStatic;
  if (name == "translating") return CameraMode::kTranslating;
  if (name == "orbiting") return CameraMode::kOrbiting;
  fail(ErrorKind::kConfig, "unknown camera mode '" + std::string(name) +
                               "' (expected static, translating or orbiting)");
}

void SceneConfig::validate() const {
  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (n_targets < 0) fail(ErrorKind::kConfig, "scene.n_targets must be >= 0");
  if (n_frames < 2) fail(ErrorKind::kConfig, "scene.n_frames must be >= 2");
  if (!frame.valid()) fail(ErrorKind::kConfig, "scene frame size must be positive");
  if (!(target_speed_px >= 0.0)) fail(ErrorKind::kConfig, "scene.target_speed_px must be >= 0");
  if (!prob(detection_drop_prob)) fail(ErrorKind::kConfig, "scene.detection_drop_prob must be in [0,1]");
  if (!(false_positive_rate >= 0.0)) fail(ErrorKind::kConfig, "scene.false_positive_rate must be >= 0");
  if (!(box_jitter_sigma >= 0.0)) fail(ErrorKind::kConfig, "scene.box_jitter_sigma must be >= 0");
  if (feature_dim < 1) fail(ErrorKind::kConfig, "scene.feature_dim must be >= 1");
  if (!(feature_noise_sigma >= 0.0)) fail(ErrorKind::kConfig, "scene.feature_noise_sigma must be >= 0");
  if (n_background_points < 0) fail(ErrorKind::kConfig, "scene.n_background_points must be >= 0");
  if (!(camera_pan_period > 0.0)) fail(ErrorKind::kConfig, "scene.camera_pan_period must be > 0");
  for (const OcclusionEvent& e : occlusion_events) {
    if (e.target < 0 || e.target >= n_targets || e.start > e.end) {
      fail(ErrorKind::kConfig, "invalid occlusion event for target " + std::to_string(e.target));
    }
  }
}

FundamentalMatrix fundamental_from_cameras(const CameraMatrix& p, const CameraMatrix& p_next) {
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(p, Eigen::ComputeFullV);
  const Eigen::Vector4d center = svd.matrixV().col(3);
  const Eigen::Vector3d e = p_next * center;
  Eigen::Matrix3d ex;
  ex << 0.0, -e.z(), e.y(), e.z(), 0.0, -e.x(), -e.y(), e.x(), 0.0;
  const Eigen::Matrix<double, 4, 3> pinv = p.transpose() * (p * p.transpose()).inverse();
  return FundamentalMatrix::from_matrix(ex * p_next * pinv);
}

SyntheticSequence generate(const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SyntheticSequence seq;
  seq.config = cfg;
  const double width = cfg.frame.width;
  const double height = cfg.frame.height;

  for (int i = 0; i < cfg.n_targets; ++i) {
    bool ok = false;
    for (int attempt = 0; attempt < kPrototypeTries && !ok; ++attempt) {
      std::vector<double> cand = random_unit(cfg.feature_dim, rng);
      ok = std::all_of(seq.prototypes.begin(), seq.prototypes.end(), [&](const auto& p) {
        double c = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) c += p[k] * cand[k];
        return std::abs(c) <= kMaxPrototypeCos;
      });
      if (ok) seq.prototypes.push_back(std::move(cand));
    }
    if (!ok) {
      fail(ErrorKind::kConfig, "could not draw " + std::to_string(cfg.n_targets) +
                                   " prototypes with |cos| <= 0.3 in dimension " +
                                   std::to_string(cfg.feature_dim));
    }
  }

  std::vector<Target> targets;
  for (int i = 0; i < cfg.n_targets; ++i) {
    Target t;
    t.w = uniform(40.0, 80.0);
    t.h = t.w * uniform(1.8, 2.6);
    t.u = uniform(t.w, width - t.w);
    t.v = uniform(0.5 * t.h + 10.0, std::max(0.5 * t.h + 11.0, height - 0.5 * t.h - 10.0));
    const double angle = uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = cfg.target_speed_px * uniform(0.5, 1.5);
    t.vu = speed * std::cos(angle);
    t.vv = 0.3 * speed * std::sin(angle);
    t.depth = uniform(8.0, 14.0);
    targets.push_back(t);
  }

  // Cameras.
  const Eigen::Matrix3d k = intrinsics(cfg.frame);
  const Eigen::Vector3d scene_center(0.0, 0.0, 12.0);
  for (int f = 0; f < cfg.n_frames; ++f) {
    switch (cfg.camera_mode) {
      case CameraMode::kStatic:
        seq.cameras.push_back(look_along(k, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ()));
        break;
      case CameraMode::kTranslating: {
        const double yaw = cfg.camera_pan_amplitude *
                           std::sin(2.0 * std::numbers::pi * f / cfg.camera_pan_period);
        const Eigen::Vector3d c(0.6 * cfg.camera_step * f, 0.0, cfg.camera_step * f);
        seq.cameras.push_back(look_along(k, c, Eigen::Vector3d(std::sin(yaw), 0.0, std::cos(yaw))));
        break;
      }
      case CameraMode::kOrbiting: {
        const double phi = cfg.orbit_step * f;
        const double r = scene_center.z();
        const Eigen::Vector3d c = scene_center + r * Eigen::Vector3d(std::sin(phi), 0.0, -std::cos(phi));
        seq.cameras.push_back(look_along(k, c, scene_center - c));
        break;
      }
    }
  }

  // Background correspondences and true geometry.
  std::vector<Eigen::Vector3d> background;
  for (int i = 0; i < cfg.n_background_points; ++i) {
    const double z = uniform(20.0, 60.0);
    const double x = uniform(-1.2, 1.2) * 0.5 * width * z / kFocal;
    const double y = uniform(-1.2, 1.2) * 0.5 * height * z / kFocal;
    background.emplace_back(x, y, z);
  }
  const bool moving = cfg.camera_mode != CameraMode::kStatic;
  seq.correspondences.resize(static_cast<std::size_t>(cfg.n_frames - 1));
  seq.true_fundamental.resize(static_cast<std::size_t>(cfg.n_frames - 1));
  if (moving) {
    const auto inside = [&](const Point2& p) {
      return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    };
    for (int f = 0; f + 1 < cfg.n_frames; ++f) {
      const CameraMatrix& p0 = seq.cameras[static_cast<std::size_t>(f)];
      const CameraMatrix& p1 = seq.cameras[static_cast<std::size_t>(f + 1)];
      seq.true_fundamental[static_cast<std::size_t>(f)] = fundamental_from_cameras(p0, p1);
      for (const Eigen::Vector3d& x : background) {
        const auto a = project(p0, x);
        const auto b = project(p1, x);
        if (a && b && inside(*a) && inside(*b)) {
          seq.correspondences[static_cast<std::size_t>(f)].push_back({*a, *b});
        }
      }
    }
  }

  // Targets, detections and clutter.
  seq.gt.resize(static_cast<std::size_t>(cfg.n_targets));
  for (int i = 0; i < cfg.n_targets; ++i) seq.gt[static_cast<std::size_t>(i)].object_id = i + 1;
  seq.detections.resize(static_cast<std::size_t>(cfg.n_frames));
  seq.detection_identity.resize(static_cast<std::size_t>(cfg.n_frames));
  const Eigen::Matrix3d k_inv = k.inverse();
  for (int f = 0; f < cfg.n_frames; ++f) {
    const CameraMatrix& cam = seq.cameras[static_cast<std::size_t>(f)];
    std::vector<std::pair<Detection, int>> frame_dets;
    for (int i = 0; i < cfg.n_targets; ++i) {
      Target& t = targets[static_cast<std::size_t>(i)];
      if (f > 0) {
        t.u += t.vu;
        t.v += t.vv;
        if (t.u - 0.5 * t.w < 0.0 || t.u + 0.5 * t.w > width) {
          t.vu = -t.vu;
          t.u = std::clamp(t.u, 0.5 * t.w, width - 0.5 * t.w);
        }
        if (t.v - 0.5 * t.h < 0.0 || t.v + 0.5 * t.h > height) {
          t.vv = -t.vv;
          t.v = std::clamp(t.v, 0.5 * t.h, height - 0.5 * t.h);
        }
      }
      // Fixed draw count per (target, frame), whatever the options.
      std::vector<double> feature = seq.prototypes[static_cast<std::size_t>(i)];
      for (double& x : feature) x += cfg.feature_noise_sigma * gauss(rng);
      normalize(feature);
      const double j1 = gauss(rng), j2 = gauss(rng), j3 = gauss(rng), j4 = gauss(rng);
      const bool dropped = unit(rng) < cfg.detection_drop_prob;

      const bool occluded = std::any_of(
          cfg.occlusion_events.begin(), cfg.occlusion_events.end(),
          [&](const OcclusionEvent& e) { return e.target == i && f >= e.start && f <= e.end; });
      if (occluded) continue;

      BoundingBox box;
      if (!moving) {
        box = {t.u, t.v, t.w, t.h};
      } else {
        // Fronto-parallel rectangle at the target's depth in the reference
        // frame, imaged by the current camera.
        double l = 1e300, r = -1e300, top = 1e300, btm = -1e300;
        bool visible = true;
        for (const Point2& c : to_corners(BoundingBox{t.u, t.v, t.w, t.h})) {
          const Eigen::Vector3d ray = k_inv * Eigen::Vector3d(c.x, c.y, 1.0);
          const auto q = project(cam, t.depth * ray);
          if (!q) {
            visible = false;
            break;
          }
          l = std::min(l, q->x);
          r = std::max(r, q->x);
          top = std::min(top, q->y);
          btm = std::max(btm, q->y);
        }
        if (!visible) continue;
        box = {0.5 * (l + r), 0.5 * (top + btm), r - l, btm - top};
        if (box.cx < 0.0 || box.cx > width || box.cy < 0.0 || box.cy > height) continue;
      }

      Detection g{f, box, 1.0, AppearanceFeature{feature}};
      seq.gt[static_cast<std::size_t>(i)].points.push_back({g, false});
      if (dropped) continue;
      Detection d = g;
      const double s = cfg.box_jitter_sigma;
      d.box.cx += s * j1 * box.w;
      d.box.cy += s * j2 * box.h;
      d.box.w = std::max(1.0, box.w * (1.0 + s * j3));
      d.box.h = std::max(1.0, box.h * (1.0 + s * j4));
      frame_dets.emplace_back(std::move(d), i + 1);
    }

    std::poisson_distribution<int> clutter(cfg.false_positive_rate);
    const int n_fp = cfg.false_positive_rate > 0.0 ? clutter(rng) : 0;
    for (int c = 0; c < n_fp; ++c) {
      const double w = uniform(30.0, 80.0);
      const double h = w * uniform(1.5, 2.5);
      Detection d{f,
                  {uniform(0.5 * w, width - 0.5 * w), uniform(0.5 * h, std::max(0.5 * h, height - 0.5 * h)), w, h},
                  uniform(0.3, 1.0),
                  AppearanceFeature{random_unit(cfg.feature_dim, rng)}};
      frame_dets.emplace_back(std::move(d), -1);
    }
    std::shuffle(frame_dets.begin(), frame_dets.end(), rng);
    for (auto& [d, id] : frame_dets) {
      seq.detections[static_cast<std::size_t>(f)].push_back(std::move(d));
      seq.detection_identity[static_cast<std::size_t>(f)].push_back(id);
    }
  }
  // Targets never visible contribute no trajectory.
  std::erase_if(seq.gt, [](const Trajectory& t) { return t.points.empty(); });
  return seq;
}

SyntheticSequence corrupt_features(const SyntheticSequence& seq, double sigma, std::uint64_t seed,
                                   bool renormalize) {
  if (!(sigma >= 0.0)) fail(ErrorKind::kInvalidArgument, "feature noise sigma must be >= 0");
  SyntheticSequence out = seq;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& frame : out.detections) {
    for (Detection& d : frame) {
      for (double& x : d.feature.values) x += n(rng);
      if (renormalize) normalize(d.feature.values);
    }
  }
  return out;
}

}  // namespace tnt
