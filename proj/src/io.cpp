#include "tnt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <system_error>

#include "tnt/synth.hpp"

namespace tnt {
namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

// Calls f(line_number, line) for each non-blank line.
template <typename F>
void for_each_line(std::string_view text, F&& f) {
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const std::string_view line =
        text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    ++number;
    if (!trim(line).empty()) f(number, line);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
}

[[noreturn]] void parse_error(const std::string& source, int line, int field, const std::string& what) {
  fail(ErrorKind::kParse, source + ":" + std::to_string(line) + ": field " + std::to_string(field) +
                              ": " + what);
}

double to_double(std::string_view s, const std::string& source, int line, int field) {
  double v = 0.0;
  const char* b = s.data();
  if (!s.empty() && s.front() == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    parse_error(source, line, field, "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

int to_int(std::string_view s, const std::string& source, int line, int field) {
  const double v = to_double(s, source, line, field);
  if (v != std::floor(v) || std::abs(v) > 2e9) {
    parse_error(source, line, field, "expected an integer, got '" + std::string(s) + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

MotFile parse_mot_text(std::string_view text, const std::string& source) {
  MotFile out;
  std::map<int, int> seen_in_frame;
  for_each_line(text, [&](int number, std::string_view line) {
    const auto f = split(line, ',');
    if (f.size() < 6 || f.size() > 10) {
      parse_error(source, number, static_cast<int>(f.size()),
                  "expected 6 to 10 comma-separated fields, got " + std::to_string(f.size()));
    }
    MotRecord r;
    r.frame = to_int(f[0], source, number, 1);
    if (r.frame < 1) parse_error(source, number, 1, "frame numbers start at 1");
    r.id = to_int(f[1], source, number, 2);
    r.left = to_double(f[2], source, number, 3);
    r.top = to_double(f[3], source, number, 4);
    r.width = to_double(f[4], source, number, 5);
    r.height = to_double(f[5], source, number, 6);
    if (f.size() > 6) r.conf = to_double(f[6], source, number, 7);
    if (f.size() > 7) r.x = to_double(f[7], source, number, 8);
    if (f.size() > 8) r.y = to_double(f[8], source, number, 9);
    if (f.size() > 9) r.z = to_double(f[9], source, number, 10);
    const int index = seen_in_frame[r.frame]++;
    if (!(r.width > 0.0 && r.height > 0.0)) {
      ++out.rejected;
      return;
    }
    out.records.push_back(r);
    out.index_in_frame.push_back(index);
  });
  return out;
}

MotFile read_mot(const std::filesystem::path& path) {
  return parse_mot_text(read_text(path), path.string());
}

DetectionSet parse_mot(const std::filesystem::path& path, int n_frames) {
  const MotFile file = read_mot(path);
  DetectionSet out;
  out.rejected = file.rejected;
  int frames = std::max(n_frames, 0);
  for (const MotRecord& r : file.records) frames = std::max(frames, r.frame);
  out.frames.resize(static_cast<std::size_t>(frames));
  out.det_index.resize(static_cast<std::size_t>(frames));
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    const MotRecord& r = file.records[i];
    Detection d;
    d.frame = r.frame - 1;
    d.box = BoundingBox::from_ltwh(r.left, r.top, r.width, r.height);
    d.confidence = r.conf;
    out.frames[static_cast<std::size_t>(d.frame)].push_back(std::move(d));
    out.det_index[static_cast<std::size_t>(r.frame - 1)].push_back(file.index_in_frame[i]);
  }
  return out;
}

std::vector<Trajectory> parse_mot_trajectories(const std::filesystem::path& path) {
  const MotFile file = read_mot(path);
  std::map<int, Trajectory> by_id;
  for (const MotRecord& r : file.records) {
    Trajectory& t = by_id[r.id];
    t.object_id = r.id;
    Detection d;
    d.frame = r.frame - 1;
    d.box = BoundingBox::from_ltwh(r.left, r.top, r.width, r.height);
    d.confidence = r.conf;
    t.points.push_back({std::move(d), r.conf == 0.0});
  }
  std::vector<Trajectory> out;
  for (auto& [id, t] : by_id) {
    std::stable_sort(t.points.begin(), t.points.end(), [](const auto& a, const auto& b) {
      return a.detection.frame < b.detection.frame;
    });
    for (std::size_t i = 1; i < t.points.size(); ++i) {
      if (t.points[i].detection.frame == t.points[i - 1].detection.frame) {
        fail(ErrorKind::kFormat, path.string() + ": id " + std::to_string(id) +
                                     " appears twice in frame " +
                                     std::to_string(t.points[i].detection.frame + 1));
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

FeatureMap parse_features(const std::filesystem::path& path, int d_ap) {
  const std::string text = read_text(path);
  const std::string source = path.string();
  FeatureMap out;
  bool header = true;
  for_each_line(text, [&](int number, std::string_view line) {
    const auto f = split(line, ',');
    if (header) {
      header = false;
      if (f.size() < 3 || f[0] != "frame" || f[1] != "det_index") {
        fail(ErrorKind::kFormat, source + ": header must start with frame,det_index");
      }
      const int declared = static_cast<int>(f.size()) - 2;
      if (declared != d_ap) {
        fail(ErrorKind::kFormat, source + ": header declares " + std::to_string(declared) +
                                     " feature columns, expected " + std::to_string(d_ap));
      }
      return;
    }
    if (static_cast<int>(f.size()) != d_ap + 2) {
      fail(ErrorKind::kFormat, source + ":" + std::to_string(number) + ": row has " +
                                   std::to_string(static_cast<int>(f.size()) - 2) +
                                   " feature values, expected " + std::to_string(d_ap));
    }
    const int frame = to_int(f[0], source, number, 1);
    const int index = to_int(f[1], source, number, 2);
    if (frame < 1 || index < 0) parse_error(source, number, 1, "frame must be >= 1, index >= 0");
    AppearanceFeature feat;
    feat.values.reserve(static_cast<std::size_t>(d_ap));
    for (int k = 0; k < d_ap; ++k) {
      feat.values.push_back(to_double(f[static_cast<std::size_t>(k + 2)], source, number, k + 3));
    }
    if (!out.emplace(std::make_pair(frame - 1, index), std::move(feat)).second) {
      fail(ErrorKind::kFormat, source + ":" + std::to_string(number) + ": duplicate row for frame " +
                                   std::to_string(frame) + " index " + std::to_string(index));
    }
  });
  if (header) fail(ErrorKind::kFormat, source + ": missing header line");
  return out;
}

void attach_features(DetectionSet& dets, const FeatureMap& features) {
  std::vector<std::string> missing;
  for (std::size_t f = 0; f < dets.frames.size(); ++f) {
    for (std::size_t i = 0; i < dets.frames[f].size(); ++i) {
      const int index = dets.det_index[f][i];
      auto it = features.find({static_cast<int>(f), index});
      if (it == features.end()) {
        if (missing.size() < 5) {
          missing.push_back("(" + std::to_string(f + 1) + "," + std::to_string(index) + ")");
        } else if (missing.size() == 5) {
          missing.push_back("...");
        }
        continue;
      }
      dets.frames[f][i].feature = it->second;
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const std::string& m : missing) list += (list.empty() ? "" : " ") + m;
    fail(ErrorKind::kCoverage, "no feature row for detection(s) (frame,det_index): " + list);
  }
}

std::vector<std::vector<Correspondence>> parse_matches(const std::filesystem::path& path,
                                                       int n_frames) {
  const std::string text = read_text(path);
  const std::string source = path.string();
  std::vector<std::vector<Correspondence>> out(static_cast<std::size_t>(std::max(n_frames - 1, 0)));
  for_each_line(text, [&](int number, std::string_view line) {
    if (trim(line).front() == '#') return;
    const auto f = split_ws(line);
    if (f.size() != 5) {
      parse_error(source, number, static_cast<int>(f.size()), "expected 't u1 v1 u2 v2'");
    }
    const int t = to_int(f[0], source, number, 1);
    if (t < 1 || t >= n_frames) {
      parse_error(source, number, 1, "frame pair " + std::to_string(t) + " outside 1.." +
                                         std::to_string(n_frames - 1));
    }
    Correspondence c{{to_double(f[1], source, number, 2), to_double(f[2], source, number, 3)},
                     {to_double(f[3], source, number, 4), to_double(f[4], source, number, 5)}};
    out[static_cast<std::size_t>(t - 1)].push_back(c);
  });
  return out;
}

DatasetMeta parse_meta(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const std::string source = path.string();
  DatasetMeta m;
  bool has_w = false, has_h = false, has_n = false;
  for_each_line(text, [&](int number, std::string_view line) {
    if (trim(line).front() == '#') return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_error(source, number, 1, "expected key=value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "width") {
      m.frame.width = to_int(value, source, number, 2);
      has_w = true;
    } else if (key == "height") {
      m.frame.height = to_int(value, source, number, 2);
      has_h = true;
    } else if (key == "fps") {
      m.frame.fps = to_double(value, source, number, 2);
    } else if (key == "frames") {
      m.n_frames = to_int(value, source, number, 2);
      has_n = true;
    } else if (key == "feature_dim") {
      m.feature_dim = to_int(value, source, number, 2);
    } else {
      parse_error(source, number, 1, "unknown key '" + std::string(key) + "'");
    }
  });
  if (!has_w || !has_h || !has_n || !m.frame.valid() || m.n_frames < 1 || m.feature_dim < 1) {
    fail(ErrorKind::kFormat, source + ": needs positive width, height, frames and feature_dim");
  }
  return m;
}

Dataset read_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.meta = parse_meta(dir / "meta.txt");
  ds.detections = parse_mot(dir / "det.txt", ds.meta.n_frames);
  if (static_cast<int>(ds.detections.frames.size()) > ds.meta.n_frames) {
    fail(ErrorKind::kFormat, (dir / "det.txt").string() + " has frames beyond meta.txt frames=" +
                                 std::to_string(ds.meta.n_frames));
  }
  attach_features(ds.detections, parse_features(dir / "features.csv", ds.meta.feature_dim));
  if (std::filesystem::exists(dir / "matches.txt")) {
    ds.matches = parse_matches(dir / "matches.txt", ds.meta.n_frames);
  } else {
    ds.matches.resize(static_cast<std::size_t>(ds.meta.n_frames - 1));
  }
  if (std::filesystem::exists(dir / "gt.txt")) ds.gt = parse_mot_trajectories(dir / "gt.txt");
  return ds;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorKind::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::kIo, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string format_mot_line(const MotRecord& r) {
  return std::to_string(r.frame) + "," + std::to_string(r.id) + "," + format_real(r.left) + "," +
         format_real(r.top) + "," + format_real(r.width) + "," + format_real(r.height) + "," +
         format_real(r.conf) + "," + format_real(r.x) + "," + format_real(r.y) + "," +
         format_real(r.z) + "\n";
}

namespace {

MotRecord to_record(const Detection& d, int id, double conf) {
  MotRecord r;
  r.frame = d.frame + 1;
  r.id = id;
  r.left = d.box.left();
  r.top = d.box.top();
  r.width = d.box.w;
  r.height = d.box.h;
  r.conf = conf;
  return r;
}

}  // namespace

std::string format_results(const std::vector<Trajectory>& trajectories) {
  std::vector<std::pair<std::pair<int, int>, MotRecord>> rows;
  for (const Trajectory& t : trajectories) {
    for (const TrajectoryPoint& p : t.points) {
      rows.push_back({{p.detection.frame, t.object_id},
                      to_record(p.detection, t.object_id, p.interpolated ? 0.0 : 1.0)});
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out;
  for (const auto& [key, r] : rows) out += format_mot_line(r);
  return out;
}

void write_results(const std::vector<Trajectory>& trajectories, const std::filesystem::path& path) {
  write_file_atomic(path, format_results(trajectories));
}

std::string format_detections(const std::vector<std::vector<Detection>>& frames) {
  std::string out;
  for (const auto& frame : frames) {
    for (const Detection& d : frame) out += format_mot_line(to_record(d, -1, d.confidence));
  }
  return out;
}

std::string format_features(const std::vector<std::vector<Detection>>& frames, int d_ap) {
  std::string out = "frame,det_index";
  for (int k = 1; k <= d_ap; ++k) out += ",f" + std::to_string(k);
  out += "\n";
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (std::size_t i = 0; i < frames[f].size(); ++i) {
      out += std::to_string(f + 1) + "," + std::to_string(i);
      for (double v : frames[f][i].feature.values) out += "," + format_real(v);
      out += "\n";
    }
  }
  return out;
}

std::string format_matches(const std::vector<std::vector<Correspondence>>& matches) {
  std::string out;
  for (std::size_t t = 0; t < matches.size(); ++t) {
    for (const Correspondence& c : matches[t]) {
      out += std::to_string(t + 1) + " " + format_real(c.p1.x) + " " + format_real(c.p1.y) + " " +
             format_real(c.p2.x) + " " + format_real(c.p2.y) + "\n";
    }
  }
  return out;
}

std::string format_meta(const DatasetMeta& meta) {
  return "width=" + std::to_string(meta.frame.width) + "\nheight=" +
         std::to_string(meta.frame.height) + "\nfps=" + format_real(meta.frame.fps) +
         "\nframes=" + std::to_string(meta.n_frames) + "\nfeature_dim=" +
         std::to_string(meta.feature_dim) + "\n";
}

void write_dataset(const SyntheticSequence& seq, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  DatasetMeta meta{seq.config.frame, seq.config.n_frames, seq.config.feature_dim};
  write_file_atomic(dir / "meta.txt", format_meta(meta));
  write_file_atomic(dir / "det.txt", format_detections(seq.detections));
  write_file_atomic(dir / "features.csv", format_features(seq.detections, seq.config.feature_dim));
  write_file_atomic(dir / "matches.txt", format_matches(seq.correspondences));
  write_file_atomic(dir / "gt.txt", format_results(seq.gt));
}

}  // namespace tnt
