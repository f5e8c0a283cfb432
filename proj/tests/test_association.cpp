#include <cmath>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "support/builders.hpp"
#include "tnt/association.hpp"

namespace tnt {
namespace {

using testing::make_detection;
using testing::make_trajectory;

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

// Image content shifts by (dx, 0) and the epipole sits at the shifted box
// centre, so the corner epipolar lines are the diagonals of the shifted box.
FundamentalMatrix shift_geometry(const BoundingBox& shifted, double dx) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h(0, 2) = dx;
  return FundamentalMatrix::from_matrix(skew({shifted.cx, shifted.cy, 1.0}) * h);
}

TEST(AssociationScore, IdenticalDetectionsScoreOne) {
  const Detection d = make_detection(0, {50, 50, 10, 20}, {1, 0});
  Detection e = d;
  e.frame = 1;
  EXPECT_DOUBLE_EQ(association_score(d, e, std::nullopt, {}), 1.0);
}

TEST(AssociationScore, DisjointOrthogonalScoresZero) {
  const Detection d = make_detection(0, {50, 50, 10, 20}, {1, 0});
  const Detection e = make_detection(1, {500, 50, 10, 20}, {0, 1});
  EXPECT_DOUBLE_EQ(association_score(d, e, std::nullopt, {}), 0.0);
}

TEST(AssociationScore, EpipolarPredictionRecoversShiftedBox) {
  const BoundingBox before{100, 80, 20, 40};
  const BoundingBox after{130, 80, 20, 40};
  const Detection d = make_detection(0, before, {1, 0, 0});
  const Detection e = make_detection(1, after, {1, 0, 0});
  ASSERT_EQ(iou(before, after), 0.0);
  EXPECT_DOUBLE_EQ(association_score(d, e, std::nullopt, {}), 0.5);
  const FundamentalMatrix f = shift_geometry(after, 30.0);
  AssociationConfig weak;
  weak.reg_weight = 1e-6;
  EXPECT_NEAR(association_score(d, e, f, weak), 1.0, 1e-4);
  // The default pull toward the previous box costs about one percent.
  EXPECT_GT(association_score(d, e, f, {}), 0.98);
}

TEST(AssociationScore, ZeroFeatureContributesNothing) {
  const Detection d = make_detection(0, {50, 50, 10, 20}, {0, 0});
  const Detection e = make_detection(1, {50, 50, 10, 20}, {1, 0});
  EXPECT_DOUBLE_EQ(association_score(d, e, std::nullopt, {}), 0.5);
}

TEST(AssociateFrame, SingleStrongPair) {
  // IOU 1, cosine 0.8: score 0.9.
  const std::vector<Detection> a{make_detection(0, {50, 50, 10, 20}, {1, 0})};
  const std::vector<Detection> b{make_detection(1, {50, 50, 10, 20}, {0.8, 0.6})};
  EXPECT_EQ(associate_frame(a, b, std::nullopt, {}), (std::vector<std::pair<int, int>>{{0, 0}}));
}

TEST(AssociateFrame, WeakPairIsGated) {
  // IOU 0, cosine 0.6: score 0.3.
  const std::vector<Detection> a{make_detection(0, {50, 50, 10, 20}, {1, 0})};
  const std::vector<Detection> b{make_detection(1, {200, 50, 10, 20}, {0.6, 0.8})};
  EXPECT_TRUE(associate_frame(a, b, std::nullopt, {}).empty());
}

TEST(AssociateFrame, OptimalAssignmentBeatsCrossing) {
  // Scores [[0.9, 0.7], [0.7, 0.9]] through cosines 0.8 and 0.4 with IOU 1.
  const double r = std::sqrt(0.2);
  const BoundingBox box{50, 50, 10, 20};
  const std::vector<Detection> a{make_detection(0, box, {1, 0, 0}), make_detection(0, box, {0, 1, 0})};
  const std::vector<Detection> b{make_detection(1, box, {0.8, 0.4, r}),
                                 make_detection(1, box, {0.4, 0.8, r})};
  EXPECT_NEAR(association_score(a[0], b[0], std::nullopt, {}), 0.9, 1e-12);
  EXPECT_NEAR(association_score(a[0], b[1], std::nullopt, {}), 0.7, 1e-12);
  EXPECT_EQ(associate_frame(a, b, std::nullopt, {}),
            (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));
}

TEST(AssociateFrame, EmptyInputs) {
  const std::vector<Detection> a{make_detection(0, {50, 50, 10, 20}, {1, 0})};
  EXPECT_TRUE(associate_frame({}, a, std::nullopt, {}).empty());
  EXPECT_TRUE(associate_frame(a, {}, std::nullopt, {}).empty());
}

std::vector<std::vector<Detection>> one_target(int n, const std::set<int>& missing = {},
                                               int flip_at = -1) {
  std::vector<std::vector<Detection>> frames(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    if (missing.count(t)) continue;
    const std::vector<double> f = (flip_at >= 0 && t >= flip_at) ? std::vector<double>{0, 1}
                                                                 : std::vector<double>{1, 0};
    frames[static_cast<std::size_t>(t)].push_back(make_detection(t, {100 + 2.0 * t, 80, 20, 40}, f));
  }
  return frames;
}

TEST(BuildTracklets, NoiselessTargetGivesOneTracklet) {
  const auto ts = build_tracklets(one_target(10), {}, {});
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_EQ(ts[0].first_frame(), 0);
  EXPECT_EQ(ts[0].length(), 10);
}

TEST(BuildTracklets, MissingFramesSplit) {
  const auto ts = build_tracklets(one_target(10, {4, 5}), {}, {});
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts[0].first_frame(), 0);
  EXPECT_EQ(ts[0].last_frame(), 3);
  EXPECT_EQ(ts[1].first_frame(), 6);
  EXPECT_EQ(ts[1].last_frame(), 9);
}

TEST(BuildTracklets, AppearanceFlipBreaks) {
  AssociationConfig cfg;
  cfg.theta_assoc = 0.4;  // the flipped pair still passes the blended gate
  const auto ts = build_tracklets(one_target(10, {}, 5), {}, cfg);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts[0].last_frame(), 4);
  EXPECT_EQ(ts[1].first_frame(), 5);
  EXPECT_EQ(ts[1].last_frame(), 9);
}

TEST(BuildTracklets, IdsFollowFirstFrameThenLeftmost) {
  std::vector<std::vector<Detection>> frames(3);
  frames[0].push_back(make_detection(0, {300, 50, 10, 20}, {0, 1}));
  frames[0].push_back(make_detection(0, {100, 50, 10, 20}, {1, 0}));
  frames[1].push_back(make_detection(1, {600, 50, 10, 20}, {1, 1}));
  const auto ts = build_tracklets(frames, {}, {});
  ASSERT_EQ(ts.size(), 3u);
  EXPECT_EQ(ts[0].detections[0].box.cx, 100);
  EXPECT_EQ(ts[1].detections[0].box.cx, 300);
  EXPECT_EQ(ts[2].detections[0].box.cx, 600);
  for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_EQ(ts[i].id, static_cast<int>(i));
}

TEST(BuildTracklets, PartitionsDetectionsOnRandomScenes) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0, 400);
  std::uniform_int_distribution<int> count(0, 6);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<Detection>> frames(20);
    std::map<std::tuple<int, double, double>, int> seen;
    for (int t = 0; t < 20; ++t) {
      const int n = count(rng);
      for (int i = 0; i < n; ++i) {
        Detection d = make_detection(t, {pos(rng), pos(rng), 30, 60}, testing::random_unit(4, rng));
        seen[{t, d.box.cx, d.box.cy}] += 1;
        frames[static_cast<std::size_t>(t)].push_back(d);
      }
    }
    const auto a = build_tracklets(frames, {}, {});
    const auto b = build_tracklets(frames, {}, {});
    EXPECT_EQ(a, b);
    for (const Tracklet& t : a) {
      EXPECT_NO_THROW(t.validate());
      for (const Detection& d : t.detections) seen[{d.frame, d.box.cx, d.box.cy}] -= 1;
    }
    for (const auto& [key, c] : seen) EXPECT_EQ(c, 0);
  }
}

TEST(AssociationErrors, PerfectTracking) {
  const Trajectory g = make_trajectory(1, 0, 9, {100, 100, 20, 40}, 3.0);
  Tracklet t;
  for (const auto& p : g.points) t.detections.push_back(p.detection);
  const AssociationErrors e = association_errors({t}, {g});
  EXPECT_EQ(e.fdr, 0.0);
  EXPECT_EQ(e.fnr, 0.0);
  EXPECT_EQ(e.counts.tp, 9);
}

TEST(AssociationErrors, TwoWrongLinksOutOfTen) {
  const Trajectory a = make_trajectory(1, 0, 4, {100, 100, 20, 40});
  const Trajectory b = make_trajectory(2, 5, 9, {300, 100, 20, 40});
  const Trajectory c = make_trajectory(3, 10, 10, {500, 100, 20, 40});
  Tracklet t;
  for (const Trajectory* g : {&a, &b, &c}) {
    for (const auto& p : g->points) t.detections.push_back(p.detection);
  }
  const AssociationErrors e = association_errors({t}, {a, b, c});
  EXPECT_EQ(e.counts.tp, 8);
  EXPECT_EQ(e.counts.fp, 2);
  EXPECT_EQ(e.counts.fn, 0);
  EXPECT_DOUBLE_EQ(e.fdr, 0.2);
}

TEST(AssociationErrors, OneMissedLinkOutOfTen) {
  const Trajectory g = make_trajectory(1, 0, 10, {100, 100, 20, 40}, 2.0);
  Tracklet t1, t2;
  for (const auto& p : g.points) (p.detection.frame <= 4 ? t1 : t2).detections.push_back(p.detection);
  const AssociationErrors e = association_errors({t1, t2}, {g});
  EXPECT_EQ(e.counts.tp, 9);
  EXPECT_EQ(e.counts.fn, 1);
  EXPECT_DOUBLE_EQ(e.fnr, 0.1);
}

TEST(AssociationErrors, NoLinksIsUndefined) {
  try {
    association_rates({0, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUndefinedMetric);
  }
}

TEST(AssociationConfig, RejectsOutOfRangeValues) {
  AssociationConfig c;
  c.theta_assoc = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.lambda_iou = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.theta_app = -2;
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace tnt
