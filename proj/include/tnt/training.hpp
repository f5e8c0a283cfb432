#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "tnt/core.hpp"
#include "tnt/trackletnet.hpp"

namespace tnt {

struct TrainConfig {
  int batch_size = 32;
  double lr_initial = 1e-3;
  int lr_decay_every = 2000;
  double lr_decay_factor = 0.1;
  double lr_floor = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int steps = 6000;
  std::uint64_t seed = 0;

  void validate() const;
};

// max(lr_floor, lr_initial * factor^floor(step / every)).
double learning_rate(const TrainConfig& cfg, int step);

struct AugmentConfig {
  double box_noise_sigma = 0.05;
  double break_prob = 0.1;  // per frame
  // Each tracklet gets N(0, s^2) feature noise with s ~ U[0, feature_noise_sigma],
  // renormalized to unit length. Zero disables it.
  double feature_noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Relative Gaussian disturbance of location and size.
Detection augment_box(const Detection& d, const AugmentConfig& cfg, std::mt19937_64& rng);

// Feature noise for one tracklet as described on AugmentConfig.
void augment_features(Tracklet& tracklet, const AugmentConfig& cfg, std::mt19937_64& rng);

// Cuts a trajectory into consecutive runs; each frame independently becomes
// a breaking frame (the first frame of a new piece) with break_prob.
// Interpolated points are kept; frame gaps always cut.
std::vector<Tracklet> split_trajectory(const Trajectory& traj, const AugmentConfig& cfg,
                                       std::mt19937_64& rng);

struct TrainingPair {
  Tracklet first;   // ends before second starts
  Tracklet second;
  FrameMeta meta;
  bool same_identity = false;
};

class PairSampler {
 public:
  virtual ~PairSampler() = default;
  // Nothing when no pair of the requested kind could be drawn.
  virtual std::optional<TrainingPair> sample(bool positive, std::mt19937_64& rng) = 0;
};

// Draws pairs from ground-truth trajectories: a trajectory is split with the
// augmentation, and two non-overlapping pieces within the window form a pair.
// Negatives take pieces from two different identities of one sequence.
class TrajectoryPairSampler : public PairSampler {
 public:
  struct Source {
    FrameMeta meta;
    std::vector<Trajectory> trajectories;
  };

  TrajectoryPairSampler(std::vector<Source> sources, AugmentConfig augment, NetConfig net);

  std::optional<TrainingPair> sample(bool positive, std::mt19937_64& rng) override;

 private:
  std::vector<Tracklet> pieces(const Trajectory& traj, std::mt19937_64& rng) const;

  std::vector<Source> sources_;
  AugmentConfig augment_;
  NetConfig net_;
};

struct TrainResult {
  NetWeights weights;
  std::vector<double> loss_history;  // one value per step
  double final_batch_accuracy = 0.0;
};

using TrainProgress = std::function<void(int step, double loss, double lr)>;

// Adam on balanced batches (ceil(B/2) positives, the rest negatives). Throws
// kSamplerExhausted when the sampler keeps failing to produce a pair.
TrainResult train(PairSampler& sampler, const TrainConfig& tcfg, const NetConfig& ncfg,
                  const TrainProgress& progress = {});

}  // namespace tnt
