#pragma once

#include <string>
#include <vector>

#include "tnt/core.hpp"

namespace tnt {

// SVG overlay of trajectory center paths on the image frame. Interpolated
// stretches are dashed; the optional ground truth is drawn underneath in
// gray.
std::string trajectories_svg(const std::vector<Trajectory>& trajectories, const FrameMeta& meta,
                             const std::vector<Trajectory>& ground_truth = {},
                             const std::string& title = "");

}  // namespace tnt
