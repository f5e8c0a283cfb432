#include "tnt/metrics.hpp"

#include <map>
#include <set>

#include "tnt/assignment.hpp"

namespace tnt {
namespace {

using FrameIndex = std::map<int, std::vector<LabeledBox>>;

FrameIndex by_frame(const std::vector<Trajectory>& trajs) {
  FrameIndex out;
  for (const Trajectory& t : trajs) {
    for (const TrajectoryPoint& p : t.points) {
      out[p.detection.frame].push_back({t.object_id, p.detection.box});
    }
  }
  return out;
}

long count_points(const std::vector<Trajectory>& trajs) {
  long n = 0;
  for (const Trajectory& t : trajs) n += static_cast<long>(t.points.size());
  return n;
}

void require_gt(long n) {
  if (n == 0) fail(ErrorKind::kUndefinedMetric, "no ground-truth detections to evaluate against");
}

// Calls f(frame, gt boxes, pred boxes, matches) for every frame with gt.
template <typename F>
void for_each_matched_frame(const FrameIndex& gt, const FrameIndex& pred, const EvalConfig& cfg,
                            F&& f) {
  static const std::vector<LabeledBox> kNone;
  for (const auto& [frame, g] : gt) {
    auto it = pred.find(frame);
    const std::vector<LabeledBox>& p = it == pred.end() ? kNone : it->second;
    f(frame, g, p, match_frame(g, p, cfg));
  }
}

}  // namespace

void EvalConfig::validate() const {
  if (!(iou_match_threshold > 0.0 && iou_match_threshold <= 1.0)) {
    fail(ErrorKind::kConfig, "eval.iou_match_threshold must be in (0,1]");
  }
}

std::vector<std::pair<int, int>> match_frame(const std::vector<LabeledBox>& gt,
                                             const std::vector<LabeledBox>& pred,
                                             const EvalConfig& cfg) {
  std::vector<std::pair<int, int>> out;
  if (gt.empty() || pred.empty()) return out;
  Eigen::MatrixXd w(static_cast<Eigen::Index>(gt.size()), static_cast<Eigen::Index>(pred.size()));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double o = iou(gt[i].box, pred[j].box);
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          o >= cfg.iou_match_threshold ? o : 0.0;
    }
  }
  const std::vector<int> m = solve_max_assignment(w);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] >= 0 && w(static_cast<Eigen::Index>(i), m[i]) > 0.0) {
      out.emplace_back(static_cast<int>(i), m[i]);
    }
  }
  return out;
}

EvalReport mota(const std::vector<Trajectory>& gt, const std::vector<Trajectory>& pred,
                const EvalConfig& cfg) {
  cfg.validate();
  EvalReport r;
  r.gt_detections = count_points(gt);
  require_gt(r.gt_detections);
  const FrameIndex gt_frames = by_frame(gt);
  const FrameIndex pred_frames = by_frame(pred);

  std::map<int, int> last_match;  // gt id -> pred id of its latest match
  std::map<int, std::vector<bool>> tracked;  // gt id -> per gt frame
  long matched_total = 0;
  for_each_matched_frame(gt_frames, pred_frames, cfg,
                         [&](int, const auto& g, const auto& p, const auto& matches) {
                           std::vector<bool> hit(g.size(), false);
                           for (const auto& [gi, pi] : matches) {
                             hit[static_cast<std::size_t>(gi)] = true;
                             const int gid = g[static_cast<std::size_t>(gi)].id;
                             const int pid = p[static_cast<std::size_t>(pi)].id;
                             auto it = last_match.find(gid);
                             if (it != last_match.end() && it->second != pid) ++r.id_switches;
                             last_match[gid] = pid;
                           }
                           for (std::size_t i = 0; i < g.size(); ++i) tracked[g[i].id].push_back(hit[i]);
                           matched_total += static_cast<long>(matches.size());
                           r.fp += static_cast<long>(p.size() - matches.size());
                         });
  // Predictions in frames without any gt are all false positives.
  for (const auto& [frame, p] : pred_frames) {
    if (!gt_frames.count(frame)) r.fp += static_cast<long>(p.size());
  }
  r.fn = r.gt_detections - matched_total;
  r.mota = 1.0 - static_cast<double>(r.fn + r.fp + r.id_switches) / r.gt_detections;

  long mt = 0, ml = 0;
  for (const auto& [id, seq] : tracked) {
    long hits = 0;
    bool was_tracked = false, interrupted = false;
    for (bool h : seq) {
      hits += h;
      if (h && interrupted) ++r.fragments;
      if (h) {
        was_tracked = true;
        interrupted = false;
      } else if (was_tracked) {
        interrupted = true;
      }
    }
    const double cover = static_cast<double>(hits) / static_cast<double>(seq.size());
    if (cover >= 0.8) ++mt;
    if (cover <= 0.2) ++ml;
  }
  r.mostly_tracked = static_cast<double>(mt) / static_cast<double>(tracked.size());
  r.mostly_lost = static_cast<double>(ml) / static_cast<double>(tracked.size());
  return r;
}

EvalReport idf1(const std::vector<Trajectory>& gt, const std::vector<Trajectory>& pred,
                const EvalConfig& cfg) {
  cfg.validate();
  EvalReport r;
  r.gt_detections = count_points(gt);
  require_gt(r.gt_detections);
  const long pred_detections = count_points(pred);

  std::map<int, int> gt_index, pred_index;
  for (const Trajectory& t : gt) gt_index.emplace(t.object_id, static_cast<int>(gt_index.size()));
  for (const Trajectory& t : pred) pred_index.emplace(t.object_id, static_cast<int>(pred_index.size()));

  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gt_index.size()),
                                                  static_cast<Eigen::Index>(pred_index.size()));
  const FrameIndex gt_frames = by_frame(gt);
  const FrameIndex pred_frames = by_frame(pred);
  // Identity overlap counts every co-occurring pair above the gate, not only
  // the per-frame matching.
  for (const auto& [frame, g] : gt_frames) {
    auto it = pred_frames.find(frame);
    if (it == pred_frames.end()) continue;
    for (const LabeledBox& a : g) {
      for (const LabeledBox& b : it->second) {
        if (iou(a.box, b.box) >= cfg.iou_match_threshold) {
          overlap(gt_index.at(a.id), pred_index.at(b.id)) += 1.0;
        }
      }
    }
  }
  if (overlap.size() > 0) {
    const std::vector<int> m = solve_max_assignment(overlap);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] >= 0) r.idtp += static_cast<long>(overlap(static_cast<Eigen::Index>(i), m[i]));
    }
  }
  r.idfn = r.gt_detections - r.idtp;
  r.idfp = pred_detections - r.idtp;
  r.idf1 = 2.0 * r.idtp / static_cast<double>(2 * r.idtp + r.idfp + r.idfn);
  return r;
}

EvalReport evaluate(const std::vector<Trajectory>& gt, const std::vector<Trajectory>& pred,
                    const EvalConfig& cfg) {
  EvalReport r = mota(gt, pred, cfg);
  const EvalReport i = idf1(gt, pred, cfg);
  r.idf1 = i.idf1;
  r.idtp = i.idtp;
  r.idfp = i.idfp;
  r.idfn = i.idfn;
  return r;
}

namespace {

std::vector<std::pair<std::string, std::string>> fields(const EvalReport& r) {
  return {{"mota", format_real(r.mota)},
          {"idf1", format_real(r.idf1)},
          {"idtp", std::to_string(r.idtp)},
          {"idfp", std::to_string(r.idfp)},
          {"idfn", std::to_string(r.idfn)},
          {"fp", std::to_string(r.fp)},
          {"fn", std::to_string(r.fn)},
          {"id_switches", std::to_string(r.id_switches)},
          {"mostly_tracked", format_real(r.mostly_tracked)},
          {"mostly_lost", format_real(r.mostly_lost)},
          {"fragments", std::to_string(r.fragments)},
          {"gt_detections", std::to_string(r.gt_detections)}};
}

}  // namespace

std::string to_key_value(const EvalReport& r) {
  std::string out;
  for (const auto& [k, v] : fields(r)) out += k + "=" + v + "\n";
  return out;
}

std::string csv_header() {
  std::string out;
  for (const auto& [k, v] : fields(EvalReport{})) out += (out.empty() ? "" : ",") + k;
  return out + "\n";
}

std::string to_csv_row(const EvalReport& r) {
  std::string out;
  bool first = true;
  for (const auto& [k, v] : fields(r)) {
    out += (first ? "" : ",") + v;
    first = false;
  }
  return out + "\n";
}

}  // namespace tnt
