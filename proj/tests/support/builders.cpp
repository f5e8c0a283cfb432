#include "support/builders.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tnt::testing {

Detection make_detection(int frame, const BoundingBox& box, std::vector<double> feature,
                         double confidence) {
  Detection d;
  d.frame = frame;
  d.box = box;
  d.confidence = confidence;
  d.feature.values = std::move(feature);
  return d;
}

Tracklet make_tracklet(int id, int first, int last, const BoundingBox& start,
                       const std::vector<double>& feature, double vx, double vy) {
  Tracklet t;
  t.id = id;
  for (int f = first; f <= last; ++f) {
    BoundingBox b = start;
    b.cx += vx * (f - first);
    b.cy += vy * (f - first);
    t.detections.push_back(make_detection(f, b, feature));
  }
  return t;
}

Trajectory make_trajectory(int id, int first, int last, const BoundingBox& start, double vx,
                           double vy) {
  Trajectory t;
  t.object_id = id;
  for (int f = first; f <= last; ++f) {
    BoundingBox b = start;
    b.cx += vx * (f - first);
    b.cy += vy * (f - first);
    t.points.push_back({make_detection(f, b), false});
  }
  return t;
}

std::vector<double> basis(int dim, int i) {
  std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
  v[static_cast<std::size_t>(i)] = 1.0;
  return v;
}

std::vector<double> random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dim));
  double s = 0.0;
  for (double& x : v) {
    x = n(rng);
    s += x * x;
  }
  for (double& x : v) x /= std::sqrt(s);
  return v;
}

BoundingBox random_box(std::mt19937_64& rng, double max_center, double max_size) {
  std::uniform_real_distribution<double> c(0.0, max_center);
  std::uniform_real_distribution<double> s(0.5, max_size);
  return {c(rng), c(rng), s(rng), s(rng)};
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "tnt-test-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace tnt::testing
