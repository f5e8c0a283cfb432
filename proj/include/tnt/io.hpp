#pragma once

// MOTChallenge-style text formats and the dataset directory:
//   det.txt       frame,id,left,top,width,height,conf,x,y,z  (frame 1-based, id -1)
//   gt.txt        same layout with object ids
//   features.csv  frame,det_index,f1..fd  (det_index: 0-based line order of
//                 the frame's records in det.txt)
//   matches.txt   t u1 v1 u2 v2  (t 1-based; point in frame t, match in t+1)
//   meta.txt      width=, height=, fps=, frames=, feature_dim=

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tnt/core.hpp"
#include "tnt/geometry.hpp"

namespace tnt {

struct SyntheticSequence;

struct MotRecord {
  int frame = 1;  // as in the file
  int id = -1;
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;
  double conf = 1.0;
  double x = -1.0;
  double y = -1.0;
  double z = -1.0;
};

struct MotFile {
  std::vector<MotRecord> records;  // accepted, file order
  std::vector<int> index_in_frame;  // per accepted record, its det_index
  int rejected = 0;                // records with non-positive size
};

// Throws kIo when unreadable and kParse (with line and field) on malformed
// lines. Accepts 6 to 10 fields; missing trailing fields take defaults.
MotFile read_mot(const std::filesystem::path& path);
MotFile parse_mot_text(std::string_view text, const std::string& source = "<text>");

struct DetectionSet {
  std::vector<std::vector<Detection>> frames;       // 0-based frames
  std::vector<std::vector<int>> det_index;          // matching features.csv
  int rejected = 0;
};

// Per-frame detections with boxes in center form. n_frames pads the result
// (frames past the last record stay empty); 0 sizes it to the data.
DetectionSet parse_mot(const std::filesystem::path& path, int n_frames = 0);

// Records grouped by id into trajectories (frames 0-based). conf == 0 marks
// an interpolated point.
std::vector<Trajectory> parse_mot_trajectories(const std::filesystem::path& path);

using FeatureMap = std::map<std::pair<int, int>, AppearanceFeature>;  // (0-based frame, det_index)

// Throws kFormat when the header or a row disagrees with d_ap.
FeatureMap parse_features(const std::filesystem::path& path, int d_ap);

// Moves features onto the detections; throws kCoverage naming the first
// missing (frame, det_index) pairs.
void attach_features(DetectionSet& dets, const FeatureMap& features);

// Per frame pair t (0-based) the correspondences between t and t+1.
std::vector<std::vector<Correspondence>> parse_matches(const std::filesystem::path& path,
                                                       int n_frames);

struct DatasetMeta {
  FrameMeta frame;
  int n_frames = 0;
  int feature_dim = 0;
};

DatasetMeta parse_meta(const std::filesystem::path& path);

struct Dataset {
  DatasetMeta meta;
  DetectionSet detections;
  std::vector<std::vector<Correspondence>> matches;
  std::vector<Trajectory> gt;  // empty when gt.txt is absent
};

// Reads a dataset directory. matches.txt and gt.txt are optional.
Dataset read_dataset(const std::filesystem::path& dir);

// Writes text to path through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string format_mot_line(const MotRecord& r);

// Tracker output: sorted by frame then id, conf 1 for real points and 0 for
// interpolated ones.
std::string format_results(const std::vector<Trajectory>& trajectories);
void write_results(const std::vector<Trajectory>& trajectories, const std::filesystem::path& path);

std::string format_detections(const std::vector<std::vector<Detection>>& frames);
std::string format_features(const std::vector<std::vector<Detection>>& frames, int d_ap);
std::string format_matches(const std::vector<std::vector<Correspondence>>& matches);
std::string format_meta(const DatasetMeta& meta);

void write_dataset(const SyntheticSequence& seq, const std::filesystem::path& dir);

}  // namespace tnt
