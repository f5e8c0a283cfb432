#pragma once

#include <vector>

#include "tnt/association.hpp"
#include "tnt/geometry.hpp"
#include "tnt/graph_cluster.hpp"
#include "tnt/trackletnet.hpp"

namespace tnt {

struct TrackerConfig {
  AssociationConfig assoc;
  RansacConfig ransac;
  int delta_t = 64;
};

struct TrackingInput {
  FrameMeta meta;
  std::vector<std::vector<Detection>> frames;
  // Per frame pair (t, t+1); may be empty or shorter than frames - 1.
  std::vector<std::vector<Correspondence>> matches;
};

struct TrackingResult {
  std::vector<FramePair> frame_pairs;
  int geometry_failures = 0;  // pairs whose F could not be estimated
  std::vector<Tracklet> tracklets;
  TrackletGraph graph;
  Partition partition;
  std::vector<Trajectory> trajectories;
};

// Fundamental matrices for every frame pair with enough matches; failed
// estimations leave the pair without a matrix.
std::vector<FramePair> estimate_frame_pairs(const std::vector<std::vector<Correspondence>>& matches,
                                            const RansacConfig& cfg, int* failures = nullptr);

ConnectivityScorer network_scorer(const NetWeights& weights, const FrameMeta& meta);

// Tracklets, graph, clustering and gap-filled trajectories.
TrackingResult track(const TrackingInput& input, const TrackerConfig& cfg,
                     const ConnectivityScorer& scorer);

// Ground-truth trajectories carrying the features of the detections they
// match (IOU >= iou_threshold, one-to-one per frame). Unmatched gt points are
// dropped, so the result suits pair sampling for training.
std::vector<Trajectory> gt_with_features(const std::vector<Trajectory>& gt,
                                         const std::vector<std::vector<Detection>>& frames,
                                         double iou_threshold = 0.5);

}  // namespace tnt
