#include <cmath>
#include <cstring>
#include <functional>
#include <random>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "support/two_view.hpp"
#include "tnt/geometry.hpp"

namespace tnt {
namespace {

using testing::random_two_view;
using testing::sign_aligned_distance;

FundamentalMatrix horizontal_translation() {
  Eigen::Matrix3d m;
  m << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  return FundamentalMatrix::from_matrix(m);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidArgument;
}

TEST(TwoViewOracle, PseudoInverseAndEssentialFormsAgree) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto s = random_two_view(rng, 10, 0.0);
    EXPECT_LT(sign_aligned_distance(s.f, testing::fundamental_essential(s.a, s.b)), 1e-9);
  }
}

TEST(FundamentalEstimation, ExactCorrespondencesRecoverOracle) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) {
    const auto s = random_two_view(rng, 50, 0.0);
    RansacConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    const FundamentalEstimate est = estimate_fundamental(s.matches, cfg);
    EXPECT_LE(sign_aligned_distance(est.f.m, s.f), 1e-6);
    EXPECT_EQ(est.inlier_count, 50);
  }
}

TEST(FundamentalEstimation, EightPointOnExactDataRecoversOracle) {
  std::mt19937_64 rng(3);
  const auto s = random_two_view(rng, 8, 0.0);
  EXPECT_LE(sign_aligned_distance(eight_point(s.matches).m, s.f), 1e-6);
}

TEST(FundamentalEstimation, GrossOutliersClassifiedExactly) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const auto s = random_two_view(rng, 50, 0.2);
    RansacConfig cfg;
    cfg.seed = seed;
    const FundamentalEstimate est = estimate_fundamental(s.matches, cfg);
    EXPECT_EQ(est.inliers, s.inlier) << "seed " << seed;
  }
}

TEST(FundamentalEstimation, InvariantsHoldOnRandomScenes) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 30; ++i) {
    const auto s = random_two_view(rng, 40, i % 3 == 0 ? 0.2 : 0.0);
    RansacConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    const FundamentalEstimate est = estimate_fundamental(s.matches, cfg);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(est.f.m);
    EXPECT_NEAR(est.f.m.norm(), 1.0, 1e-12);
    EXPECT_LT(svd.singularValues()(2), 1e-12);
    EXPECT_GT(svd.singularValues()(1), 1e-6);
    for (std::size_t k = 0; k < s.matches.size(); ++k) {
      if (s.inlier[k]) EXPECT_LE(sampson_distance(est.f, s.matches[k]), cfg.inlier_threshold);
    }
  }
}

TEST(FundamentalEstimation, DeterministicForSeed) {
  std::mt19937_64 rng(5);
  const auto s = random_two_view(rng, 60, 0.3);
  RansacConfig cfg;
  cfg.seed = 77;
  const auto a = estimate_fundamental(s.matches, cfg);
  const auto b = estimate_fundamental(s.matches, cfg);
  EXPECT_EQ(a.f.m, b.f.m);
  EXPECT_EQ(a.inliers, b.inliers);
}

TEST(FundamentalEstimation, SevenMatchesAreInsufficient) {
  std::mt19937_64 rng(6);
  const auto s = random_two_view(rng, 7, 0.0);
  EXPECT_EQ(kind_of([&] { estimate_fundamental(s.matches, RansacConfig{}); }),
            ErrorKind::kInsufficientData);
}

TEST(FundamentalEstimation, NoConsensusIsDegenerate) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  std::vector<Correspondence> m;
  for (int i = 0; i < 60; ++i) m.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
  RansacConfig cfg;
  cfg.min_inlier_fraction = 0.9;
  EXPECT_EQ(kind_of([&] { estimate_fundamental(m, cfg); }), ErrorKind::kDegenerateGeometry);
}

TEST(FundamentalMatrix, FromMatrixEnforcesInvariants) {
  Eigen::Matrix3d raw;
  raw << 1, 2, 3, 4, 5, 6, 7, 8, 10;
  const FundamentalMatrix f = FundamentalMatrix::from_matrix(raw);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(f.m);
  EXPECT_NEAR(f.m.norm(), 1.0, 1e-12);
  EXPECT_LT(svd.singularValues()(2), 1e-12);
}

TEST(EpipolarLine, HorizontalTranslationExample) {
  const Eigen::Vector3d l = epipolar_line(horizontal_translation(), {3, 7});
  EXPECT_NEAR(l.x(), 0.0, 1e-15);
  EXPECT_NEAR(l.y(), -1.0, 1e-15);
  EXPECT_NEAR(l.z(), 7.0, 1e-14);
}

TEST(EpipolarLine, EvaluationIsPerpendicularDistance) {
  std::mt19937_64 rng(8);
  const auto s = random_two_view(rng, 10, 0.0);
  const FundamentalMatrix f = FundamentalMatrix::from_matrix(s.f);
  for (const Correspondence& c : s.matches) {
    const Eigen::Vector3d l = epipolar_line(f, c.p1);
    EXPECT_NEAR(std::hypot(l.x(), l.y()), 1.0, 1e-12);
    EXPECT_NEAR(line_distance(l, c.p2), 0.0, 1e-6);
    const Point2 off{c.p2.x + 4.5 * l.x(), c.p2.y + 4.5 * l.y()};
    EXPECT_NEAR(std::abs(line_distance(l, off)), 4.5, 1e-6);
  }
}

TEST(EpipolarLine, ScaleInvariant) {
  Eigen::Matrix3d raw;
  raw << 0.1, -0.3, 2, 0.5, 0.02, -4, -1, 3, 0.7;
  const FundamentalMatrix f = FundamentalMatrix::from_matrix(raw);
  FundamentalMatrix f5;
  f5.m = f.m * 5.0;
  const Eigen::Vector3d a = epipolar_line(f, {12, -4});
  const Eigen::Vector3d b = epipolar_line(f5, {12, -4});
  EXPECT_LT((a - b).norm(), 1e-12);
}

TEST(EpipolarLine, EpipoleIsDegenerate) {
  // [v]x with v = (3, 5, 1) maps (3, 5, 1) to zero.
  FundamentalMatrix f;
  f.m << 0, -1, 5, 1, 0, -3, -5, 3, 0;
  EXPECT_EQ(kind_of([&] { epipolar_line(f, {3, 5}); }), ErrorKind::kDegenerateLine);
}

TEST(PredictBox, PureTranslationReturnsRegularizedBox) {
  const BoundingBox b{10, 10, 4, 4};
  const BoundingBox p = predict_box(b, horizontal_translation(), 1e-6);
  EXPECT_NEAR(p.cx, 10.0, 1e-6);
  EXPECT_NEAR(p.cy, 10.0, 1e-9);
  EXPECT_NEAR(p.w, 4.0, 1e-9);
  EXPECT_NEAR(p.h, 4.0, 1e-9);
}

TEST(PredictBox, PureTranslationWithoutRegularizerIsRankDeficient) {
  EXPECT_EQ(kind_of([] { predict_box({10, 10, 4, 4}, horizontal_translation(), 0.0); }),
            ErrorKind::kRankDeficient);
}

const testing::MotionRange kShake = testing::camera_jitter(1.0, 0.1);
const testing::MotionRange kTinyJitter = testing::camera_jitter(0.07, 0.007);

TEST(PredictBox, LargeRegularizerReturnsInputBox) {
  std::mt19937_64 rng(9);
  const auto s = testing::random_box_scene(rng, kShake);
  const FundamentalMatrix f = FundamentalMatrix::from_matrix(s.views.f);
  const BoundingBox p = predict_box(s.box_a, f, 1e12);
  EXPECT_NEAR(p.cx, s.box_a.cx, 1e-6);
  EXPECT_NEAR(p.cy, s.box_a.cy, 1e-6);
  EXPECT_NEAR(p.w, s.box_a.w, 1e-6);
  EXPECT_NEAR(p.h, s.box_a.h, 1e-6);
}

TEST(PredictBox, MatchesProjectedRectangleUnderCameraJitter) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 50; ++i) {
    const auto s = testing::random_box_scene(rng, kTinyJitter);
    RansacConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    const FundamentalMatrix f = estimate_fundamental(s.views.matches, cfg).f;
    const Corners got = to_corners(predict_box(s.box_a, f));
    const Corners want = to_corners(s.box_b);
    for (int c = 0; c < 4; ++c) {
      EXPECT_NEAR(got[c].x, want[c].x, 1.5) << "scene " << i;
      EXPECT_NEAR(got[c].y, want[c].y, 1.5) << "scene " << i;
    }
  }
}

TEST(PredictBox, CostNeverExceedsInputBoxCost) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto s = testing::random_box_scene(rng, kShake);
    const FundamentalMatrix f = FundamentalMatrix::from_matrix(s.views.f);
    for (double reg : {1e-6, 1e-2}) {
      const BoundingBox p = predict_box(s.box_a, f, reg);
      EXPECT_LE(predict_box_cost(s.box_a, f, reg, p), predict_box_cost(s.box_a, f, reg, s.box_a) + 1e-9);
    }
  }
}

TEST(PredictBox, EquivariantToPixelRescaling) {
  std::mt19937_64 rng(12);
  for (double scale : {0.5, 2.0, 3.7}) {
    const auto s = testing::random_box_scene(rng, kShake);
    const FundamentalMatrix f = FundamentalMatrix::from_matrix(s.views.f);
    const Eigen::Matrix3d sinv = Eigen::Vector3d(1 / scale, 1 / scale, 1).asDiagonal();
    const FundamentalMatrix fs = FundamentalMatrix::from_matrix(sinv * f.m * sinv);
    const BoundingBox a = predict_box(s.box_a, f);
    const BoundingBox scaled{s.box_a.cx * scale, s.box_a.cy * scale, s.box_a.w * scale,
                             s.box_a.h * scale};
    const BoundingBox b = predict_box(scaled, fs);
    EXPECT_NEAR(b.cx, a.cx * scale, 1e-9 * std::abs(a.cx * scale));
    EXPECT_NEAR(b.cy, a.cy * scale, 1e-9 * std::abs(a.cy * scale));
    EXPECT_NEAR(b.w, a.w * scale, 1e-9 * a.w * scale);
    EXPECT_NEAR(b.h, a.h * scale, 1e-9 * a.h * scale);
  }
}

}  // namespace
}  // namespace tnt
