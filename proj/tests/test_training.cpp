#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "support/builders.hpp"
#include "support/separable_task.hpp"
#include "tnt/training.hpp"

namespace tnt {
namespace {

NetConfig small_net() {
  NetConfig c;
  c.T = 16;
  c.d_ap = 8;
  c.channels = 4;
  c.fc_hidden = 32;
  return c;
}

TEST(LearningRate, StepScheduleReachesFloor) {
  const TrainConfig cfg;
  EXPECT_EQ(learning_rate(cfg, 0), 1e-3);
  EXPECT_EQ(learning_rate(cfg, 1999), 1e-3);
  EXPECT_EQ(learning_rate(cfg, 2000), 1e-4);
  EXPECT_EQ(learning_rate(cfg, 4000), 1e-5);
  EXPECT_EQ(learning_rate(cfg, 6000), 1e-5);
  EXPECT_EQ(learning_rate(cfg, 60000), 1e-5);
}

TEST(TrainConfig, RejectsFloorAboveInitial) {
  TrainConfig c;
  c.lr_floor = 1e-2;
  EXPECT_THROW(c.validate(), Error);
}

TEST(AugmentBox, ZeroSigmaIsIdentity) {
  AugmentConfig cfg;
  cfg.box_noise_sigma = 0.0;
  std::mt19937_64 rng(1);
  const Detection d = testing::make_detection(3, {100, 50, 20, 40}, {1, 0});
  EXPECT_EQ(augment_box(d, cfg, rng), d);
}

TEST(AugmentBox, RelativeShiftHasConfiguredSpread) {
  AugmentConfig cfg;  // sigma 0.05
  std::mt19937_64 rng(2);
  const Detection d = testing::make_detection(0, {100, 50, 20, 40}, {1});
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = (augment_box(d, cfg, rng).box.cx - 100.0) / 20.0;
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  EXPECT_NEAR(sd, 0.05, 0.002);
}

TEST(AugmentBox, SizesStayPositive) {
  AugmentConfig cfg;
  cfg.box_noise_sigma = 3.0;
  std::mt19937_64 rng(3);
  const Detection d = testing::make_detection(0, {100, 50, 20, 40}, {1});
  for (int i = 0; i < 10000; ++i) {
    const Detection a = augment_box(d, cfg, rng);
    EXPECT_GT(a.box.w, 0.0);
    EXPECT_GT(a.box.h, 0.0);
  }
}

Trajectory path(int length) { return testing::make_trajectory(1, 0, length - 1, {100, 100, 20, 40}, 1.0); }

TEST(SplitTrajectory, NoBreaksKeepsWholeTrajectory) {
  AugmentConfig cfg;
  cfg.break_prob = 0.0;
  std::mt19937_64 rng(4);
  const auto pieces = split_trajectory(path(12), cfg, rng);
  ASSERT_EQ(pieces.size(), 1u);
  EXPECT_EQ(pieces[0].length(), 12);
}

TEST(SplitTrajectory, CertainBreaksGiveSingletons) {
  AugmentConfig cfg;
  cfg.break_prob = 1.0;
  std::mt19937_64 rng(5);
  const auto pieces = split_trajectory(path(12), cfg, rng);
  ASSERT_EQ(pieces.size(), 12u);
  for (const auto& p : pieces) EXPECT_EQ(p.length(), 1);
}

TEST(SplitTrajectory, ConcatenationReproducesInput) {
  AugmentConfig cfg;
  cfg.break_prob = 0.3;
  std::mt19937_64 rng(6);
  const Trajectory t = path(40);
  for (int i = 0; i < 50; ++i) {
    std::vector<Detection> all;
    for (const auto& p : split_trajectory(t, cfg, rng)) {
      EXPECT_NO_THROW(p.validate());
      all.insert(all.end(), p.detections.begin(), p.detections.end());
    }
    ASSERT_EQ(all.size(), t.points.size());
    for (std::size_t k = 0; k < all.size(); ++k) EXPECT_EQ(all[k], t.points[k].detection);
  }
}

TEST(SplitTrajectory, ExpectedPieceCount) {
  AugmentConfig cfg;
  cfg.break_prob = 0.1;
  const int L = 30;
  const int n = 4000;
  std::mt19937_64 rng(7);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += static_cast<double>(split_trajectory(path(L), cfg, rng).size());
  const double expected = 1.0 + (L - 1) * 0.1;
  const double sigma = std::sqrt((L - 1) * 0.1 * 0.9 / n);
  EXPECT_NEAR(total / n, expected, 3.0 * sigma);
}

TEST(SplitTrajectory, FrameGapsAlwaysCut) {
  AugmentConfig cfg;
  cfg.break_prob = 0.0;
  Trajectory t = path(10);
  t.points.erase(t.points.begin() + 4, t.points.begin() + 6);
  std::mt19937_64 rng(8);
  EXPECT_EQ(split_trajectory(t, cfg, rng).size(), 2u);
}

TEST(TrajectoryPairSampler, PairsAreOrderedAndLabeled) {
  std::vector<Trajectory> trajs;
  std::mt19937_64 rng(9);
  for (int id = 1; id <= 4; ++id) {
    Trajectory t = testing::make_trajectory(id, 0, 59, {100.0 * id, 200, 30, 60}, 2.0);
    const auto f = testing::random_unit(4, rng);
    for (auto& p : t.points) p.detection.feature.values = f;
    trajs.push_back(t);
  }
  NetConfig net = small_net();
  net.d_ap = 4;
  TrajectoryPairSampler sampler({{{960, 540, 25}, trajs}}, AugmentConfig{}, net);
  int pos = 0, neg = 0;
  for (int i = 0; i < 400; ++i) {
    const bool want = i % 2 == 0;
    const auto p = sampler.sample(want, rng);
    if (!p) continue;
    EXPECT_EQ(p->same_identity, want);
    EXPECT_LT(p->first.last_frame(), p->second.first_frame());
    EXPECT_LT(time_gap(p->first, p->second), net.T);
    const bool same = p->first.detections[0].feature == p->second.detections[0].feature;
    EXPECT_EQ(same, want);
    (want ? pos : neg) += 1;
  }
  EXPECT_GT(pos, 150);
  EXPECT_GT(neg, 150);
}

class EmptySampler : public PairSampler {
 public:
  std::optional<TrainingPair> sample(bool, std::mt19937_64&) override { return std::nullopt; }
};

TEST(Train, ExhaustedSamplerIsReported) {
  EmptySampler s;
  TrainConfig t;
  t.steps = 3;
  try {
    train(s, t, small_net());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSamplerExhausted);
  }
}

TEST(Train, SameSeedGivesIdenticalWeights) {
  testing::SeparablePairSampler s(small_net());
  TrainConfig t;
  t.steps = 20;
  t.batch_size = 8;
  t.seed = 4;
  const TrainResult a = train(s, t, small_net());
  const TrainResult b = train(s, t, small_net());
  EXPECT_EQ(a.weights.fc1_weight, b.weights.fc1_weight);
  EXPECT_EQ(a.weights.conv[0].branches[2].weight, b.weights.conv[0].branches[2].weight);
  EXPECT_EQ(a.loss_history, b.loss_history);
}

TEST(Train, LossFallsOverFirstSteps) {
  testing::SeparablePairSampler s(small_net());
  TrainConfig t;
  t.steps = 200;
  t.seed = 1;
  const TrainResult r = train(s, t, small_net());
  ASSERT_EQ(r.loss_history.size(), 200u);
  std::vector<double> avg;
  for (int k = 0; k < 4; ++k) {
    avg.push_back(std::accumulate(r.loss_history.begin() + 50 * k, r.loss_history.begin() + 50 * (k + 1), 0.0) / 50);
  }
  for (int k = 1; k < 4; ++k) EXPECT_LT(avg[static_cast<std::size_t>(k)], avg[static_cast<std::size_t>(k - 1)]);
}

}  // namespace
}  // namespace tnt
