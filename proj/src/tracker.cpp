#include "tnt/tracker.hpp"

#include <map>

#include "tnt/assignment.hpp"

namespace tnt {

std::vector<FramePair> estimate_frame_pairs(const std::vector<std::vector<Correspondence>>& matches,
                                            const RansacConfig& cfg, int* failures) {
  std::vector<FramePair> pairs;
  int failed = 0;
  for (std::size_t t = 0; t < matches.size(); ++t) {
    FramePair p;
    p.t = static_cast<int>(t);
    if (!matches[t].empty()) {
      RansacConfig c = cfg;
      c.seed = cfg.seed + t;
      try {
        p.fundamental = estimate_fundamental(matches[t], c).f;
      } catch (const Error&) {
        ++failed;
      }
    }
    pairs.push_back(std::move(p));
  }
  if (failures) *failures = failed;
  return pairs;
}

ConnectivityScorer network_scorer(const NetWeights& weights, const FrameMeta& meta) {
  return [&weights, meta](const Tracklet& u, const Tracklet& w) {
    return connectivity(u, w, weights, meta);
  };
}

TrackingResult track(const TrackingInput& input, const TrackerConfig& cfg,
                     const ConnectivityScorer& scorer) {
  TrackingResult r;
  if (cfg.assoc.use_eg) {
    r.frame_pairs = estimate_frame_pairs(input.matches, cfg.ransac, &r.geometry_failures);
  }
  r.tracklets = build_tracklets(input.frames, r.frame_pairs, cfg.assoc);
  r.graph = build_graph(r.tracklets, scorer, cfg.delta_t);
  r.partition = cluster(r.graph);
  r.trajectories = emit_trajectories(r.partition, r.tracklets);
  return r;
}

std::vector<Trajectory> gt_with_features(const std::vector<Trajectory>& gt,
                                         const std::vector<std::vector<Detection>>& frames,
                                         double iou_threshold) {
  struct Ref {
    std::size_t traj;
    std::size_t point;
  };
  std::map<int, std::vector<Ref>> at_frame;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t p = 0; p < gt[i].points.size(); ++p) {
      at_frame[gt[i].points[p].detection.frame].push_back({i, p});
    }
  }
  std::vector<std::vector<bool>> keep(gt.size());
  std::vector<Trajectory> out = gt;
  for (std::size_t i = 0; i < gt.size(); ++i) keep[i].assign(gt[i].points.size(), false);
  for (const auto& [frame, refs] : at_frame) {
    if (frame < 0 || frame >= static_cast<int>(frames.size())) continue;
    const auto& dets = frames[static_cast<std::size_t>(frame)];
    if (dets.empty()) continue;
    Eigen::MatrixXd w(static_cast<Eigen::Index>(refs.size()), static_cast<Eigen::Index>(dets.size()));
    for (std::size_t a = 0; a < refs.size(); ++a) {
      const BoundingBox& box = gt[refs[a].traj].points[refs[a].point].detection.box;
      for (std::size_t b = 0; b < dets.size(); ++b) {
        const double o = iou(box, dets[b].box);
        w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = o >= iou_threshold ? o : 0.0;
      }
    }
    const std::vector<int> m = solve_max_assignment(w);
    for (std::size_t a = 0; a < refs.size(); ++a) {
      if (m[a] < 0 || w(static_cast<Eigen::Index>(a), m[a]) <= 0.0) continue;
      keep[refs[a].traj][refs[a].point] = true;
      out[refs[a].traj].points[refs[a].point].detection.feature =
          dets[static_cast<std::size_t>(m[a])].feature;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::vector<TrajectoryPoint> pts;
    for (std::size_t p = 0; p < out[i].points.size(); ++p) {
      if (keep[i][p]) pts.push_back(std::move(out[i].points[p]));
    }
    out[i].points = std::move(pts);
  }
  std::erase_if(out, [](const Trajectory& t) { return t.points.empty(); });
  return out;
}

}  // namespace tnt
