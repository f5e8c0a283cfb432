#include "tnt/association.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "tnt/assignment.hpp"
#include "tnt/simd.hpp"

namespace tnt {
namespace {

// Cosine similarity, or nothing when either side is empty or zero.
std::optional<double> appearance_similarity(const std::vector<double>& a,
                                            const std::vector<double>& b) {
  if (a.empty() || a.size() != b.size()) return std::nullopt;
  const double na = simd::dot<double>(a, a);
  const double nb = simd::dot<double>(b, b);
  if (na <= 0.0 || nb <= 0.0) return std::nullopt;
  return std::clamp(simd::dot<double>(a, b) / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace

void AssociationConfig::validate() const {
  if (!(theta_assoc > 0.0 && theta_assoc <= 1.0)) {
    fail(ErrorKind::kConfig, "assoc.theta_assoc must be in (0,1]");
  }
  if (!(lambda_iou >= 0.0 && lambda_iou <= 1.0)) {
    fail(ErrorKind::kConfig, "assoc.lambda_iou must be in [0,1]");
  }
  if (!(theta_app >= -1.0 && theta_app <= 1.0)) {
    fail(ErrorKind::kConfig, "assoc.theta_app must be in [-1,1]");
  }
  if (!(reg_weight >= 0.0)) fail(ErrorKind::kConfig, "assoc.reg_weight must be >= 0");
}

double association_score(const Detection& d_t, const Detection& d_t1,
                         const std::optional<FundamentalMatrix>& f,
                         const AssociationConfig& cfg) {
  BoundingBox predicted = d_t.box;
  if (f) {
    try {
      predicted = predict_box(d_t.box, *f, cfg.reg_weight);
    } catch (const Error&) {
      predicted = d_t.box;
    }
  }
  const double overlap = iou(predicted, d_t1.box);
  const double appearance =
      appearance_similarity(d_t.feature.values, d_t1.feature.values).value_or(0.0);
  return cfg.lambda_iou * overlap + (1.0 - cfg.lambda_iou) * appearance;
}

std::vector<std::pair<int, int>> associate_frame(const std::vector<Detection>& dets_t,
                                                 const std::vector<Detection>& dets_t1,
                                                 const std::optional<FundamentalMatrix>& f,
                                                 const AssociationConfig& cfg) {
  std::vector<std::pair<int, int>> pairs;
  if (dets_t.empty() || dets_t1.empty()) return pairs;

  // The prediction only depends on the source detection.
  std::vector<Detection> sources = dets_t;
  if (f) {
    for (Detection& d : sources) {
      try {
        d.box = predict_box(d.box, *f, cfg.reg_weight);
      } catch (const Error&) {
      }
    }
  }
  Eigen::MatrixXd score(static_cast<Eigen::Index>(dets_t.size()),
                        static_cast<Eigen::Index>(dets_t1.size()));
  for (std::size_t i = 0; i < dets_t.size(); ++i) {
    for (std::size_t j = 0; j < dets_t1.size(); ++j) {
      score(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          association_score(sources[i], dets_t1[j], std::nullopt, cfg);
    }
  }
  const std::vector<int> match = solve_max_assignment(score);
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] < 0) continue;
    if (score(static_cast<Eigen::Index>(i), match[i]) >= cfg.theta_assoc) {
      pairs.emplace_back(static_cast<int>(i), match[i]);
    }
  }
  return pairs;
}

std::vector<Tracklet> build_tracklets(const std::vector<std::vector<Detection>>& frames,
                                      const std::vector<FramePair>& fpairs,
                                      const AssociationConfig& cfg) {
  cfg.validate();
  std::map<int, const FramePair*> pair_at;
  for (const FramePair& p : fpairs) pair_at[p.t] = &p;

  struct Building {
    Tracklet tracklet;
    std::vector<double> feature_sum;
    std::size_t order = 0;  // creation order, breaks sort ties
  };
  std::vector<Building> building;
  auto start = [&](const Detection& d) {
    Building b;
    b.tracklet.detections.push_back(d);
    b.feature_sum = d.feature.values;
    b.order = building.size();
    building.push_back(std::move(b));
    return building.size() - 1;
  };

  std::vector<std::size_t> owner;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::vector<std::size_t> next_owner(frames[t].size(), 0);
    std::vector<bool> claimed(frames[t].size(), false);
    if (t > 0 && !frames[t - 1].empty() && !frames[t].empty()) {
      std::optional<FundamentalMatrix> f;
      if (cfg.use_eg) {
        if (auto it = pair_at.find(static_cast<int>(t - 1));
            it != pair_at.end() && it->second->fundamental) {
          f = it->second->fundamental;
        }
      }
      for (const auto& [i, j] : associate_frame(frames[t - 1], frames[t], f, cfg)) {
        Building& b = building[owner[static_cast<std::size_t>(i)]];
        const Detection& d = frames[t][static_cast<std::size_t>(j)];
        // Occlusion rule: a large appearance change ends the tracklet.
        const auto sim = appearance_similarity(d.feature.values, b.feature_sum);
        if (sim && *sim < cfg.theta_app) continue;
        b.tracklet.detections.push_back(d);
        for (std::size_t k = 0; k < b.feature_sum.size() && k < d.feature.size(); ++k) {
          b.feature_sum[k] += d.feature.values[k];
        }
        next_owner[static_cast<std::size_t>(j)] = owner[static_cast<std::size_t>(i)];
        claimed[static_cast<std::size_t>(j)] = true;
      }
    }
    for (std::size_t j = 0; j < frames[t].size(); ++j) {
      if (!claimed[j]) next_owner[j] = start(frames[t][j]);
    }
    owner = std::move(next_owner);
  }

  std::sort(building.begin(), building.end(), [](const Building& a, const Building& b) {
    const Detection& da = a.tracklet.detections.front();
    const Detection& db = b.tracklet.detections.front();
    if (da.frame != db.frame) return da.frame < db.frame;
    if (da.box.cx != db.box.cx) return da.box.cx < db.box.cx;
    return a.order < b.order;
  });
  std::vector<Tracklet> out;
  out.reserve(building.size());
  for (std::size_t k = 0; k < building.size(); ++k) {
    building[k].tracklet.id = static_cast<int>(k);
    out.push_back(std::move(building[k].tracklet));
  }
  return out;
}

LinkCounts count_links(const std::vector<Tracklet>& tracklets, const std::vector<Trajectory>& gt,
                       double iou_threshold) {
  // Detections per frame, as (tracklet, position).
  std::map<int, std::vector<std::pair<std::size_t, std::size_t>>> dets_at;
  for (std::size_t k = 0; k < tracklets.size(); ++k) {
    for (std::size_t p = 0; p < tracklets[k].detections.size(); ++p) {
      dets_at[tracklets[k].detections[p].frame].emplace_back(k, p);
    }
  }
  struct GtBox {
    int id;
    const BoundingBox* box;
  };
  std::map<int, std::vector<GtBox>> gt_at;
  for (const Trajectory& traj : gt) {
    for (const TrajectoryPoint& pt : traj.points) {
      gt_at[pt.detection.frame].push_back({traj.object_id, &pt.detection.box});
    }
  }

  std::vector<std::vector<int>> label(tracklets.size());
  for (std::size_t k = 0; k < tracklets.size(); ++k) {
    label[k].assign(tracklets[k].detections.size(), -1);
  }
  // (gt id, frame) -> detection it was matched to.
  std::map<std::pair<int, int>, std::pair<std::size_t, std::size_t>> matched_det;
  for (const auto& [frame, dets] : dets_at) {
    auto it = gt_at.find(frame);
    if (it == gt_at.end()) continue;
    const auto& gts = it->second;
    Eigen::MatrixXd w(static_cast<Eigen::Index>(gts.size()), static_cast<Eigen::Index>(dets.size()));
    for (std::size_t g = 0; g < gts.size(); ++g) {
      for (std::size_t d = 0; d < dets.size(); ++d) {
        const Detection& det = tracklets[dets[d].first].detections[dets[d].second];
        const double o = iou(*gts[g].box, det.box);
        w(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(d)) = o >= iou_threshold ? o : 0.0;
      }
    }
    const std::vector<int> m = solve_max_assignment(w);
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (m[g] < 0 || w(static_cast<Eigen::Index>(g), m[g]) <= 0.0) continue;
      const auto [k, p] = dets[static_cast<std::size_t>(m[g])];
      label[k][p] = gts[g].id;
      matched_det[{gts[g].id, frame}] = {k, p};
    }
  }

  LinkCounts counts;
  for (std::size_t k = 0; k < tracklets.size(); ++k) {
    for (std::size_t p = 1; p < label[k].size(); ++p) {
      if (label[k][p] >= 0 && label[k][p] == label[k][p - 1]) {
        ++counts.tp;
      } else {
        ++counts.fp;
      }
    }
  }
  for (const Trajectory& traj : gt) {
    for (std::size_t i = 1; i < traj.points.size(); ++i) {
      const int f0 = traj.points[i - 1].detection.frame;
      const int f1 = traj.points[i].detection.frame;
      if (f1 != f0 + 1) continue;
      auto a = matched_det.find({traj.object_id, f0});
      auto b = matched_det.find({traj.object_id, f1});
      if (a == matched_det.end() || b == matched_det.end()) continue;
      const bool linked =
          a->second.first == b->second.first && b->second.second == a->second.second + 1;
      if (!linked) ++counts.fn;
    }
  }
  return counts;
}

AssociationErrors association_rates(const LinkCounts& counts) {
  if (counts.tp + counts.fp == 0 || counts.tp + counts.fn == 0) {
    fail(ErrorKind::kUndefinedMetric, "FDR/FNR undefined: no links to rate");
  }
  AssociationErrors e;
  e.counts = counts;
  e.fdr = static_cast<double>(counts.fp) / static_cast<double>(counts.tp + counts.fp);
  e.fnr = static_cast<double>(counts.fn) / static_cast<double>(counts.tp + counts.fn);
  return e;
}

AssociationErrors association_errors(const std::vector<Tracklet>& tracklets,
                                     const std::vector<Trajectory>& gt, double iou_threshold) {
  return association_rates(count_links(tracklets, gt, iou_threshold));
}

}  // namespace tnt
