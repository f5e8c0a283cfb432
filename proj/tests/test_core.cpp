#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/builders.hpp"
#include "tnt/core.hpp"

namespace tnt {
namespace {

using testing::make_tracklet;

TEST(Iou, IdenticalBoxesGiveOne) { EXPECT_DOUBLE_EQ(iou({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0); }

TEST(Iou, DisjointBoxesGiveZero) { EXPECT_DOUBLE_EQ(iou({0, 0, 1, 1}, {5, 5, 1, 1}), 0.0); }

TEST(Iou, HalfOffsetUnitSquares) {
  // Intersection 0.5, union 1.5.
  EXPECT_NEAR(iou({0, 0, 1, 1}, {0.5, 0, 1, 1}), 1.0 / 3.0, 1e-15);
}

TEST(Iou, PropertiesOverRandomBoxes) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const BoundingBox a = testing::random_box(rng);
    const BoundingBox b = testing::random_box(rng);
    const double ab = iou(a, b);
    EXPECT_EQ(ab, iou(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_NEAR(iou(a, a), 1.0, 1e-13);
  }
}

TEST(Corners, CenteredSquare) {
  const Corners c = to_corners({0, 0, 2, 2});
  EXPECT_EQ(c[0], (Point2{-1, -1}));
  EXPECT_EQ(c[1], (Point2{1, -1}));
  EXPECT_EQ(c[2], (Point2{1, 1}));
  EXPECT_EQ(c[3], (Point2{-1, 1}));
}

TEST(Corners, OffsetBox) {
  const Corners c = to_corners({5, 3, 4, 2});
  EXPECT_EQ(c[0], (Point2{3, 2}));
  EXPECT_EQ(c[1], (Point2{7, 2}));
  EXPECT_EQ(c[2], (Point2{7, 4}));
  EXPECT_EQ(c[3], (Point2{3, 4}));
}

TEST(Corners, RoundTripToMachinePrecision) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const BoundingBox b = testing::random_box(rng, 2000.0, 300.0);
    const BoundingBox r = from_corners(to_corners(b));
    EXPECT_NEAR(r.cx, b.cx, 4e-16 * (std::abs(b.cx) + b.w));
    EXPECT_NEAR(r.cy, b.cy, 4e-16 * (std::abs(b.cy) + b.h));
    EXPECT_NEAR(r.w, b.w, 1e-12 * b.w + 1e-13);
    EXPECT_NEAR(r.h, b.h, 1e-12 * b.h + 1e-13);
  }
}

TEST(NormalizeBox, FullHdFrame) {
  const BoundingBox n = normalize_box({960, 540, 192, 108}, {1920, 1080, 25});
  EXPECT_DOUBLE_EQ(n.cx, 0.5);
  EXPECT_DOUBLE_EQ(n.cy, 0.5);
  EXPECT_DOUBLE_EQ(n.w, 0.1);
  EXPECT_DOUBLE_EQ(n.h, 0.1);
}

TEST(NormalizeBox, UnitFrameIsIdentity) {
  const BoundingBox b{3.5, -2, 7, 9};
  EXPECT_EQ(normalize_box(b, {1, 1, 25}), b);
}

TEST(NormalizeBox, RoundTrip) {
  std::mt19937_64 rng(5);
  const FrameMeta meta{1280, 720, 30};
  for (int i = 0; i < 1000; ++i) {
    const BoundingBox b = testing::random_box(rng, 1000.0, 200.0);
    const BoundingBox r = denormalize_box(normalize_box(b, meta), meta);
    EXPECT_NEAR(r.cx, b.cx, 1e-12 * std::abs(b.cx));
    EXPECT_NEAR(r.cy, b.cy, 1e-12 * std::abs(b.cy));
    EXPECT_NEAR(r.w, b.w, 1e-12 * b.w);
    EXPECT_NEAR(r.h, b.h, 1e-12 * b.h);
  }
}

TEST(Cosine, SelfIsOne) {
  const AppearanceFeature a{{0.3, -2.0, 5.0}};
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-15);
}

TEST(Cosine, OrthogonalIsZero) {
  EXPECT_DOUBLE_EQ(cosine_similarity({{1, 0}}, {{0, 1}}), 0.0);
}

TEST(Cosine, FortyFiveDegrees) {
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(cosine_similarity({{1, 0}}, {{s, s}}), 0.7071067811865476, 1e-9);
}

TEST(Cosine, ZeroVectorIsDegenerate) {
  try {
    cosine_similarity({{0, 0}}, {{1, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateFeature);
  }
}

TEST(Cosine, LengthMismatchIsRejected) {
  EXPECT_THROW(cosine_similarity({{1, 0}}, {{1, 0, 0}}), Error);
}

TEST(TimeRelations, AdjacentRangesDoNotOverlap) {
  const Tracklet u = make_tracklet(0, 0, 9, {}, {1});
  const Tracklet w = make_tracklet(1, 10, 19, {}, {1});
  EXPECT_FALSE(time_overlap(u, w));
  EXPECT_EQ(time_gap(u, w), 1);
}

TEST(TimeRelations, SharedFrameOverlaps) {
  const Tracklet u = make_tracklet(0, 0, 9, {}, {1});
  const Tracklet w = make_tracklet(1, 9, 12, {}, {1});
  EXPECT_TRUE(time_overlap(u, w));
  EXPECT_EQ(time_gap(u, w), 0);
}

TEST(TimeRelations, ContainmentOverlaps) {
  EXPECT_TRUE(time_overlap(make_tracklet(0, 0, 9, {}, {1}), make_tracklet(1, 3, 5, {}, {1})));
}

TEST(TimeRelations, GapOfSix) {
  EXPECT_EQ(time_gap(make_tracklet(0, 0, 9, {}, {1}), make_tracklet(1, 15, 20, {}, {1})), 6);
}

TEST(TimeRelations, SymmetryAndZeroGapMeansOverlap) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> f(0, 40);
  for (int i = 0; i < 500; ++i) {
    int a = f(rng), b = f(rng), c = f(rng), d = f(rng);
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    const Tracklet u = make_tracklet(0, a, b, {}, {1});
    const Tracklet w = make_tracklet(1, c, d, {}, {1});
    EXPECT_EQ(time_gap(u, w), time_gap(w, u));
    EXPECT_EQ(time_gap(u, w) == 0, time_overlap(u, w));
  }
}

TEST(TrackletValidate, RejectsNonConsecutiveFrames) {
  Tracklet t = make_tracklet(0, 0, 3, {}, {1});
  t.detections[2].frame = 5;
  EXPECT_THROW(t.validate(), Error);
  EXPECT_NO_THROW(make_tracklet(0, 0, 3, {}, {1}).validate());
}

TEST(FormatReal, ShortestRoundTrip) {
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(1e-5), "1e-05");
  EXPECT_EQ(format_real(64.0), "64");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    EXPECT_EQ(std::stod(format_real(v)), v);
  }
}

}  // namespace
}  // namespace tnt
