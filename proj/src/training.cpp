#include "tnt/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tnt {

void TrainConfig::validate() const {
  if (batch_size < 1) fail(ErrorKind::kConfig, "train.batch_size must be >= 1");
  if (!(lr_initial > 0.0)) fail(ErrorKind::kConfig, "train.lr_initial must be > 0");
  if (lr_decay_every < 1) fail(ErrorKind::kConfig, "train.lr_decay_every must be >= 1");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) {
    fail(ErrorKind::kConfig, "train.lr_decay_factor must be in (0,1]");
  }
  if (!(lr_floor > 0.0 && lr_floor <= lr_initial)) {
    fail(ErrorKind::kConfig, "train.lr_floor must be in (0, lr_initial]");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    fail(ErrorKind::kConfig, "train.adam_beta1/2 must be in [0,1)");
  }
  if (!(adam_eps > 0.0)) fail(ErrorKind::kConfig, "train.adam_eps must be > 0");
  if (steps < 0) fail(ErrorKind::kConfig, "train.steps must be >= 0");
}

double learning_rate(const TrainConfig& cfg, int step) {
  const int n = std::max(step, 0) / cfg.lr_decay_every;
  // Dividing by the exact power of 1/factor keeps decimal rates exact
  // (1e-3 / 100 is 1e-5; 1e-3 * 0.1^2 is not).
  const double lr = cfg.lr_initial / std::pow(1.0 / cfg.lr_decay_factor, n);
  return std::max(cfg.lr_floor, lr);
}

void AugmentConfig::validate() const {
  if (!(box_noise_sigma >= 0.0)) fail(ErrorKind::kConfig, "augment.box_noise_sigma must be >= 0");
  if (!(break_prob >= 0.0 && break_prob <= 1.0)) {
    fail(ErrorKind::kConfig, "augment.break_prob must be in [0,1]");
  }
  if (!(feature_noise_sigma >= 0.0)) {
    fail(ErrorKind::kConfig, "augment.feature_noise_sigma must be >= 0");
  }
}

Detection augment_box(const Detection& d, const AugmentConfig& cfg, std::mt19937_64& rng) {
  if (cfg.box_noise_sigma == 0.0) return d;
  std::normal_distribution<double> n(0.0, cfg.box_noise_sigma);
  const double a1 = n(rng), a2 = n(rng), a3 = n(rng), a4 = n(rng);
  Detection out = d;
  out.box.cx = d.box.cx + a1 * d.box.w;
  out.box.cy = d.box.cy + a2 * d.box.h;
  out.box.w = std::max(1e-6, d.box.w * (1.0 + a3));
  out.box.h = std::max(1e-6, d.box.h * (1.0 + a4));
  return out;
}

void augment_features(Tracklet& tracklet, const AugmentConfig& cfg, std::mt19937_64& rng) {
  if (cfg.feature_noise_sigma == 0.0) return;
  const double sigma = std::uniform_real_distribution<double>(0.0, cfg.feature_noise_sigma)(rng);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Detection& d : tracklet.detections) {
    if (d.feature.values.empty()) continue;
    for (double& v : d.feature.values) v += sigma * n(rng);
    const double norm = d.feature.norm();
    if (norm > 0.0) {
      for (double& v : d.feature.values) v /= norm;
    }
  }
}

std::vector<Tracklet> split_trajectory(const Trajectory& traj, const AugmentConfig& cfg,
                                       std::mt19937_64& rng) {
  if (traj.points.empty()) fail(ErrorKind::kInvalidArgument, "cannot split an empty trajectory");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Tracklet> out;
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const Detection& d = traj.points[i].detection;
    // One draw per frame keeps the random stream independent of the gaps.
    const bool breaking = u(rng) < cfg.break_prob;
    const bool gap = i > 0 && d.frame != traj.points[i - 1].detection.frame + 1;
    if (out.empty() || breaking || gap) {
      out.emplace_back();
      out.back().id = traj.object_id;
    }
    out.back().detections.push_back(d);
  }
  return out;
}

TrajectoryPairSampler::TrajectoryPairSampler(std::vector<Source> sources, AugmentConfig augment,
                                             NetConfig net)
    : sources_(std::move(sources)), augment_(augment), net_(net) {
  augment_.validate();
  net_.validate();
}

std::vector<Tracklet> TrajectoryPairSampler::pieces(const Trajectory& traj,
                                                    std::mt19937_64& rng) const {
  std::vector<Tracklet> out = split_trajectory(traj, augment_, rng);
  for (Tracklet& t : out) {
    for (Detection& d : t.detections) d = augment_box(d, augment_, rng);
    augment_features(t, augment_, rng);
  }
  return out;
}

std::optional<TrainingPair> TrajectoryPairSampler::sample(bool positive, std::mt19937_64& rng) {
  if (sources_.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick_source(0, sources_.size() - 1);
  const Source& src = sources_[pick_source(rng)];
  const auto& trajs = src.trajectories;
  if (trajs.empty() || (!positive && trajs.size() < 2)) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick_traj(0, trajs.size() - 1);

  const auto fits = [this](const Tracklet& a, const Tracklet& b) {
    return a.last_frame() < b.first_frame() && b.first_frame() - a.last_frame() < net_.T;
  };
  std::vector<std::pair<Tracklet, Tracklet>> candidates;
  if (positive) {
    const Trajectory& traj = trajs[pick_traj(rng)];
    if (traj.points.size() < 2) return std::nullopt;
    std::vector<Tracklet> ps = pieces(traj, rng);
    if (ps.size() < 2) {
      // Force one cut so a positive pair exists.
      Tracklet whole = std::move(ps.front());
      std::uniform_int_distribution<int> cut(1, whole.length() - 1);
      const auto at = whole.detections.begin() + cut(rng);
      ps.assign(2, Tracklet{});
      ps[0].detections.assign(whole.detections.begin(), at);
      ps[1].detections.assign(at, whole.detections.end());
    }
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        if (fits(ps[i], ps[j])) candidates.emplace_back(ps[i], ps[j]);
      }
    }
  } else {
    const std::size_t a = pick_traj(rng);
    std::size_t b = pick_traj(rng);
    if (a == b) b = (b + 1) % trajs.size();
    const std::vector<Tracklet> pa = pieces(trajs[a], rng);
    const std::vector<Tracklet> pb = pieces(trajs[b], rng);
    for (const Tracklet& x : pa) {
      for (const Tracklet& y : pb) {
        if (fits(x, y)) candidates.emplace_back(x, y);
        if (fits(y, x)) candidates.emplace_back(y, x);
      }
    }
  }
  if (candidates.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  auto& [first, second] = candidates[pick(rng)];
  TrainingPair pair;
  pair.first = std::move(first);
  pair.second = std::move(second);
  pair.meta = src.meta;
  pair.same_identity = positive;
  return pair;
}

TrainResult train(PairSampler& sampler, const TrainConfig& tcfg, const NetConfig& ncfg,
                  const TrainProgress& progress) {
  tcfg.validate();
  ncfg.validate();
  std::mt19937_64 rng(tcfg.seed);
  TrainResult result;
  result.weights = NetWeights::glorot(ncfg, ncfg.seed);

  std::vector<std::vector<double>> m1, m2;
  result.weights.for_each_tensor([&](std::span<float> s, const TensorDims&) {
    m1.emplace_back(s.size(), 0.0);
    m2.emplace_back(s.size(), 0.0);
  });

  constexpr int kMaxTries = 1000;
  const int n_pos = (tcfg.batch_size + 1) / 2;
  std::vector<LabeledInput> batch(static_cast<std::size_t>(tcfg.batch_size));
  for (int step = 0; step < tcfg.steps; ++step) {
    for (int i = 0; i < tcfg.batch_size; ++i) {
      const bool positive = i < n_pos;
      std::optional<TrainingPair> pair;
      for (int tries = 0; tries < kMaxTries && !pair; ++tries) pair = sampler.sample(positive, rng);
      if (!pair) {
        fail(ErrorKind::kSamplerExhausted,
             std::string("sampler produced no ") + (positive ? "positive" : "negative") +
                 " pair in " + std::to_string(kMaxTries) + " attempts");
      }
      batch[static_cast<std::size_t>(i)].input =
          assemble_input(pair->first, pair->second, pair->meta, ncfg);
      batch[static_cast<std::size_t>(i)].label = positive ? 1 : 0;
    }

    const LossGradient<float> lg = loss_and_gradient<float>(batch, result.weights);
    const double lr = learning_rate(tcfg, step);
    const double t = step + 1;
    const double c1 = 1.0 - std::pow(tcfg.adam_beta1, t);
    const double c2 = 1.0 - std::pow(tcfg.adam_beta2, t);
    std::vector<std::span<const float>> grads;
    lg.grad.for_each_tensor([&](std::span<const float> s, const TensorDims&) { grads.push_back(s); });
    std::size_t k = 0;
    result.weights.for_each_tensor([&](std::span<float> w, const TensorDims&) {
      auto& a = m1[k];
      auto& b = m2[k];
      const auto g = grads[k];
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g[i];
        a[i] = tcfg.adam_beta1 * a[i] + (1.0 - tcfg.adam_beta1) * gi;
        b[i] = tcfg.adam_beta2 * b[i] + (1.0 - tcfg.adam_beta2) * gi * gi;
        const double step_size = lr * (a[i] / c1) / (std::sqrt(b[i] / c2) + tcfg.adam_eps);
        w[i] = static_cast<float>(w[i] - step_size);
      }
      ++k;
    });

    result.loss_history.push_back(lg.loss);
    if (step + 1 == tcfg.steps) {
      int correct = 0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        correct += (lg.probabilities[i] >= 0.5) == (batch[i].label == 1);
      }
      result.final_batch_accuracy = static_cast<double>(correct) / batch.size();
    }
    if (progress) progress(step, lg.loss, lr);
  }
  return result;
}

}  // namespace tnt
