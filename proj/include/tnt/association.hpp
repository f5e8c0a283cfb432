#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "tnt/core.hpp"
#include "tnt/geometry.hpp"

namespace tnt {

struct AssociationConfig {
  double theta_assoc = 0.6;  // gate on the blended score
  double lambda_iou = 0.5;   // weight of IOU against appearance
  double theta_app = 0.5;    // appearance break against the running mean
  bool use_eg = false;
  double reg_weight = 1e-2;  // forwarded to predict_box

  void validate() const;
};

// Fundamental matrix for the frame pair (t, t+1), when available.
struct FramePair {
  int t = 0;
  std::optional<FundamentalMatrix> fundamental;
};

// lambda * IOU(pred, next) + (1 - lambda) * cos(features), where pred is the
// epipolar prediction of d_t's box when f is given. A collapsed prediction
// falls back to d_t's box; a zero feature contributes zero appearance score.
double association_score(const Detection& d_t, const Detection& d_t1,
                         const std::optional<FundamentalMatrix>& f, const AssociationConfig& cfg);

// Optimal one-to-one matching on the blended score, gated afterwards.
std::vector<std::pair<int, int>> associate_frame(const std::vector<Detection>& dets_t,
                                                 const std::vector<Detection>& dets_t1,
                                                 const std::optional<FundamentalMatrix>& f,
                                                 const AssociationConfig& cfg);

// Chains frame-to-frame matches into tracklets. frames[t] holds the
// detections of frame t; fpairs may be empty or sparse (missing pairs and
// pairs without a matrix associate without epipolar prediction).
std::vector<Tracklet> build_tracklets(const std::vector<std::vector<Detection>>& frames,
                                      const std::vector<FramePair>& fpairs,
                                      const AssociationConfig& cfg);

struct LinkCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

struct AssociationErrors {
  double fdr = 0.0;
  double fnr = 0.0;
  LinkCounts counts;
};

// Raw link counts: detections are labeled by IOU >= iou_threshold matching
// against the ground truth of their frame.
LinkCounts count_links(const std::vector<Tracklet>& tracklets,
                       const std::vector<Trajectory>& gt, double iou_threshold = 0.5);

// Rates from counts; throws kUndefinedMetric when a denominator is zero.
AssociationErrors association_rates(const LinkCounts& counts);

// FDR = FP / (TP + FP), FNR = FN / (TP + FN) over adjacent-frame links.
AssociationErrors association_errors(const std::vector<Tracklet>& tracklets,
                                     const std::vector<Trajectory>& gt,
                                     double iou_threshold = 0.5);

}  // namespace tnt
