#include "tnt/plot.hpp"

#include <array>

namespace tnt {
namespace {

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                               "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// One polyline per run of points sharing the interpolated flag, consecutive
// runs sharing an end point.
void paths(std::string& out, const Trajectory& t, const std::string& color, double width,
           bool gray) {
  std::size_t i = 0;
  while (i < t.points.size()) {
    const bool interp = t.points[i].interpolated;
    std::size_t j = i;
    while (j + 1 < t.points.size() && t.points[j + 1].interpolated == interp) ++j;
    const std::size_t from = i > 0 ? i - 1 : i;
    std::string pts;
    for (std::size_t k = from; k <= j; ++k) {
      const BoundingBox& b = t.points[k].detection.box;
      pts += (pts.empty() ? "" : " ") + format_real(b.cx) + "," + format_real(b.cy);
    }
    out += "  <polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + format_real(width) +
           "\"" + (interp ? " stroke-dasharray=\"6,4\"" : "") +
           (gray ? " stroke-opacity=\"0.5\"" : "") + " points=\"" + pts + "\"/>\n";
    i = j + 1;
  }
}

}  // namespace

std::string trajectories_svg(const std::vector<Trajectory>& trajectories, const FrameMeta& meta,
                             const std::vector<Trajectory>& ground_truth, const std::string& title) {
  const std::string w = std::to_string(meta.width);
  const std::string h = std::to_string(meta.height);
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h +
                    "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
  out += "  <rect x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h +
         "\" fill=\"white\" stroke=\"black\"/>\n";
  if (!title.empty()) {
    out += "  <text x=\"8\" y=\"20\" font-family=\"sans-serif\" font-size=\"16\">" + escape(title) +
           "</text>\n";
  }
  for (const Trajectory& t : ground_truth) paths(out, t, "#999999", 6.0, true);
  for (const Trajectory& t : trajectories) {
    if (t.points.empty()) continue;
    const std::string color =
        kPalette[static_cast<std::size_t>(t.object_id < 0 ? -t.object_id : t.object_id) % kPalette.size()];
    paths(out, t, color, 2.0, false);
    const BoundingBox& last = t.points.back().detection.box;
    out += "  <rect x=\"" + format_real(last.left()) + "\" y=\"" + format_real(last.top()) +
           "\" width=\"" + format_real(last.w) + "\" height=\"" + format_real(last.h) +
           "\" fill=\"none\" stroke=\"" + color + "\"/>\n";
    out += "  <text x=\"" + format_real(last.left()) + "\" y=\"" + format_real(last.top() - 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color + "\">" +
           std::to_string(t.object_id) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace tnt
