#pragma once

#include <random>
#include <vector>

#include "tnt/graph_cluster.hpp"

namespace tnt::testing {

// Objective computed straight from the connectivities: log((1-p)/p) per
// edge, +1 inside a cluster and -1 across. Edges with p = 0 are skipped
// (they can only run across clusters in a feasible partition, so their
// contribution is the same for every feasible partition).
double oracle_objective(const TrackletGraph& g, const std::vector<int>& labels);

// Feasible: no time overlap inside a cluster, no p = 0 edge inside a
// cluster, every cluster connected through graph edges.
bool oracle_feasible(const TrackletGraph& g, const std::vector<int>& labels);

struct PartitionOptimum {
  double best = 0.0;
  std::vector<int> labels;
  long feasible = 0;
  long total = 0;
};

// Enumerates every set partition (restricted growth strings).
PartitionOptimum exhaustive_optimum(const TrackletGraph& g);

// Random tracklets on a short timeline, random connectivities in (0,1) for
// the gated pairs and p = 0 for overlaps.
TrackletGraph random_graph(std::mt19937_64& rng, int n_vertices, int timeline = 30,
                           int delta_t = 12);

}  // namespace tnt::testing
