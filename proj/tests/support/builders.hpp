#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tnt/core.hpp"

namespace tnt::testing {

Detection make_detection(int frame, const BoundingBox& box, std::vector<double> feature = {},
                         double confidence = 1.0);

// Frames first..last, box moving by (vx, vy) per frame, constant feature.
Tracklet make_tracklet(int id, int first, int last, const BoundingBox& start,
                       const std::vector<double>& feature, double vx = 0.0, double vy = 0.0);

Trajectory make_trajectory(int id, int first, int last, const BoundingBox& start, double vx = 0.0,
                           double vy = 0.0);

// Unit vector e_i of length dim.
std::vector<double> basis(int dim, int i);

std::vector<double> random_unit(int dim, std::mt19937_64& rng);

BoundingBox random_box(std::mt19937_64& rng, double max_center = 100.0, double max_size = 30.0);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tnt::testing
