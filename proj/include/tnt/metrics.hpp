#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tnt/core.hpp"

namespace tnt {

struct EvalConfig {
  double iou_match_threshold = 0.5;

  void validate() const;
};

struct EvalReport {
  double mota = 0.0;
  double idf1 = 0.0;
  long fp = 0;
  long fn = 0;
  long id_switches = 0;
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;
  double mostly_tracked = 0.0;  // fraction of gt identities covered >= 80%
  double mostly_lost = 0.0;     // fraction covered <= 20%
  long fragments = 0;
  long gt_detections = 0;
};

struct LabeledBox {
  int id = 0;
  BoundingBox box;
};

// Maximum-total-IOU one-to-one matching restricted to pairs with IOU at or
// above the threshold. Returns (gt index, pred index) pairs by gt index.
std::vector<std::pair<int, int>> match_frame(const std::vector<LabeledBox>& gt,
                                             const std::vector<LabeledBox>& pred,
                                             const EvalConfig& cfg);

// CLEAR-MOT fields: mota, fp, fn, id_switches, mostly_tracked, mostly_lost,
// fragments, gt_detections. Throws kUndefinedMetric with no gt detections.
EvalReport mota(const std::vector<Trajectory>& gt, const std::vector<Trajectory>& pred,
                const EvalConfig& cfg);

// Identity fields: idf1, idtp, idfp, idfn, gt_detections.
EvalReport idf1(const std::vector<Trajectory>& gt, const std::vector<Trajectory>& pred,
                const EvalConfig& cfg);

// Both of the above in one report.
EvalReport evaluate(const std::vector<Trajectory>& gt, const std::vector<Trajectory>& pred,
                    const EvalConfig& cfg);

// "key=value" lines in csv column order.
std::string to_key_value(const EvalReport& r);

// mota,idf1,idtp,idfp,idfn,fp,fn,id_switches,mostly_tracked,mostly_lost,fragments,gt_detections
std::string csv_header();
std::string to_csv_row(const EvalReport& r);

}  // namespace tnt
