#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tnt/core.hpp"
#include "tnt/geometry.hpp"

namespace tnt {

enum class CameraMode { kStatic, kTranslating, kOrbiting };

std::string_view to_string(CameraMode mode);
// Throws kConfig for an unknown name.
CameraMode camera_mode_from_string(std::string_view name);

struct OcclusionEvent {
  int target = 0;  // 0-based target index
  int start = 0;   // inclusive frames
  int end = 0;
};

struct SceneConfig {
  int n_targets = 5;
  int n_frames = 100;
  FrameMeta frame{960, 540, 25.0};
  double target_speed_px = 3.0;  // mean image speed in the reference view
  double detection_drop_prob = 0.0;
  double false_positive_rate = 0.0;  // Poisson mean per frame
  double box_jitter_sigma = 0.0;     // relative to box size
  int feature_dim = 8;
  double feature_noise_sigma = 0.1;
  CameraMode camera_mode = CameraMode::kStatic;
  int n_background_points = 200;
  std::vector<OcclusionEvent> occlusion_events;
  // Translating mode: forward/lateral step per frame (scene units) and a
  // sinusoidal yaw pan.
  double camera_step = 0.05;
  double camera_pan_amplitude = 0.12;  // radians
  double camera_pan_period = 30.0;     // frames
  // Orbiting mode: angular step around the scene center, radians per frame.
  double orbit_step = 0.004;
  std::uint64_t seed = 0;

  void validate() const;
};

using CameraMatrix = Eigen::Matrix<double, 3, 4>;

struct SyntheticSequence {
  SceneConfig config;
  std::vector<Trajectory> gt;                       // object ids 1..n_targets
  std::vector<std::vector<Detection>> detections;   // per frame
  std::vector<std::vector<int>> detection_identity; // gt object id, or -1 for clutter
  std::vector<std::vector<Correspondence>> correspondences;       // pair (t, t+1)
  std::vector<std::optional<FundamentalMatrix>> true_fundamental; // pair (t, t+1)
  std::vector<CameraMatrix> cameras;
  std::vector<std::vector<double>> prototypes;
};

// Deterministic given cfg.seed. Throws kConfig when the prototypes cannot be
// kept pairwise |cos| <= 0.3 within 10^4 draws.
SyntheticSequence generate(const SceneConfig& cfg);

// Adds N(0, sigma^2) to every detection feature entry (renormalizing to unit
// length when asked). Ground truth is left untouched.
SyntheticSequence corrupt_features(const SyntheticSequence& seq, double sigma, std::uint64_t seed,
                                   bool renormalize = true);

// F with x_{t+1}^T F x_t = 0 for cameras p (frame t) and p_next (frame t+1).
FundamentalMatrix fundamental_from_cameras(const CameraMatrix& p, const CameraMatrix& p_next);

}  // namespace tnt
