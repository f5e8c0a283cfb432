#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tnt/core.hpp"

namespace tnt {

// Costs are clamped to +-kCostSaturation in place of infinities.
inline constexpr double kCostSaturation = 1e12;

// log((1 - p) / p); negative values favor joining the two tracklets.
double edge_cost(double p);

struct GraphEdge {
  int u = 0;  // u < w after construction
  int w = 0;
  double p = 0.0;
  double cost = 0.0;
};

// Vertices are addressed by their position in vertices(), not by Tracklet::id.
class TrackletGraph {
 public:
  TrackletGraph() = default;
  // Throws kInvalidArgument on self-edges, duplicates, out-of-range ends,
  // p outside [0,1], edges beyond the gate, or overlapping pairs with p != 0.
  TrackletGraph(std::vector<Tracklet> vertices, std::vector<GraphEdge> edges, int delta_t);

  int size() const { return static_cast<int>(vertices_.size()); }
  int delta_t() const { return delta_t_; }
  const std::vector<Tracklet>& vertices() const { return vertices_; }
  // Sorted by (u, w).
  const std::vector<GraphEdge>& edges() const { return edges_; }
  // (neighbor, edge index) pairs, neighbors ascending.
  const std::vector<std::pair<int, int>>& neighbors(int v) const {
    return adjacency_[static_cast<std::size_t>(v)];
  }
  std::optional<double> connectivity(int u, int w) const;

 private:
  std::vector<Tracklet> vertices_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
  int delta_t_ = 0;
};

using ConnectivityScorer = std::function<double(const Tracklet&, const Tracklet&)>;

// Edges for every pair with time_gap <= delta_t, scored by scorer; pairs that
// overlap in time get p = 0 without consulting it.
TrackletGraph build_graph(std::vector<Tracklet> tracklets, const ConnectivityScorer& scorer,
                          int delta_t);

struct Partition {
  std::vector<int> cluster_of;  // per vertex

  int cluster_count() const;
  // Members per cluster, each ascending.
  std::vector<std::vector<int>> clusters() const;
  // Relabels clusters 0..k-1 in order of their lowest vertex.
  Partition canonical() const;

  static Partition singletons(int n);

  friend bool operator==(const Partition&, const Partition&) = default;
};

// Reason the partition is infeasible for g, or nothing when it is feasible:
// clusters must not overlap in time, contain a p = 0 edge, or be disconnected.
std::optional<std::string> feasibility_violation(const TrackletGraph& g, const Partition& part);

// Sum over edges of +cost (same cluster) or -cost (different clusters).
// Throws kFeasibility for an infeasible partition.
double objective(const TrackletGraph& g, const Partition& part);

struct ClusterStats {
  int rounds = 0;
  std::array<int, 5> applied{};  // assign, merge, split, switch, break
};

// Greedy local search from all-singletons; applies the best improving
// assign/merge/split/switch/break move until none improves. Deterministic,
// so the seed only exists for interface symmetry and is unused.
Partition cluster(const TrackletGraph& g, std::uint64_t seed = 0, ClusterStats* stats = nullptr);

// One trajectory per cluster, ids 1..k in canonical cluster order. Frames
// between member tracklets are filled by linear box interpolation; filled
// points carry the nearest real feature, confidence 0 and interpolated=true.
std::vector<Trajectory> emit_trajectories(const Partition& part,
                                          const std::vector<Tracklet>& tracklets);

// Bhattacharyya coefficient of the min-shifted, sum-normalized mean features.
// Returns 0.5 when either mean feature is constant.
double bhattacharyya_scorer(const Tracklet& u, const Tracklet& w);

}  // namespace tnt
