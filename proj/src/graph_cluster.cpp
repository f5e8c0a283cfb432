#include "tnt/graph_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace tnt {

double edge_cost(double p) {
  if (!(p > 0.0)) return kCostSaturation;
  if (!(p < 1.0)) return -kCostSaturation;
  return std::clamp(std::log((1.0 - p) / p), -kCostSaturation, kCostSaturation);
}

TrackletGraph::TrackletGraph(std::vector<Tracklet> vertices, std::vector<GraphEdge> edges,
                             int delta_t)
    : vertices_(std::move(vertices)), delta_t_(delta_t) {
  const int n = size();
  for (GraphEdge& e : edges) {
    if (e.u > e.w) std::swap(e.u, e.w);
    if (e.u == e.w) fail(ErrorKind::kInvalidArgument, "self-edge on vertex " + std::to_string(e.u));
    if (e.u < 0 || e.w >= n) fail(ErrorKind::kInvalidArgument, "edge end out of range");
    if (!(e.p >= 0.0 && e.p <= 1.0)) {
      fail(ErrorKind::kInvalidArgument, "connectivity outside [0,1] on an edge");
    }
    const Tracklet& a = vertices_[static_cast<std::size_t>(e.u)];
    const Tracklet& b = vertices_[static_cast<std::size_t>(e.w)];
    if (time_gap(a, b) > delta_t_) {
      fail(ErrorKind::kInvalidArgument, "edge (" + std::to_string(e.u) + "," +
                                            std::to_string(e.w) + ") exceeds the time gate");
    }
    if (time_overlap(a, b) && e.p != 0.0) {
      fail(ErrorKind::kInvalidArgument, "overlapping tracklets must have connectivity 0");
    }
    e.cost = edge_cost(e.p);
  }
  std::sort(edges.begin(), edges.end(),
            [](const GraphEdge& x, const GraphEdge& y) { return std::tie(x.u, x.w) < std::tie(y.u, y.w); });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].u == edges[i - 1].u && edges[i].w == edges[i - 1].w) {
      fail(ErrorKind::kInvalidArgument, "duplicate edge (" + std::to_string(edges[i].u) + "," +
                                            std::to_string(edges[i].w) + ")");
    }
  }
  edges_ = std::move(edges);
  adjacency_.assign(static_cast<std::size_t>(n), {});
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    adjacency_[static_cast<std::size_t>(edges_[i].u)].emplace_back(edges_[i].w, static_cast<int>(i));
    adjacency_[static_cast<std::size_t>(edges_[i].w)].emplace_back(edges_[i].u, static_cast<int>(i));
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

std::optional<double> TrackletGraph::connectivity(int u, int w) const {
  if (u < 0 || u >= size()) return std::nullopt;
  const auto& adj = adjacency_[static_cast<std::size_t>(u)];
  auto it = std::lower_bound(adj.begin(), adj.end(), std::make_pair(w, -1));
  if (it == adj.end() || it->first != w) return std::nullopt;
  return edges_[static_cast<std::size_t>(it->second)].p;
}

TrackletGraph build_graph(std::vector<Tracklet> tracklets, const ConnectivityScorer& scorer,
                          int delta_t) {
  if (delta_t < 0) fail(ErrorKind::kConfig, "graph.delta_t must be >= 0");
  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    for (std::size_t j = i + 1; j < tracklets.size(); ++j) {
      const Tracklet& a = tracklets[i];
      const Tracklet& b = tracklets[j];
      if (time_gap(a, b) > delta_t) continue;
      const double p = time_overlap(a, b) ? 0.0 : std::clamp(scorer(a, b), 0.0, 1.0);
      edges.push_back({static_cast<int>(i), static_cast<int>(j), p, 0.0});
    }
  }
  return TrackletGraph(std::move(tracklets), std::move(edges), delta_t);
}

int Partition::cluster_count() const {
  return static_cast<int>(std::set<int>(cluster_of.begin(), cluster_of.end()).size());
}

std::vector<std::vector<int>> Partition::clusters() const {
  const Partition c = canonical();
  std::vector<std::vector<int>> out(static_cast<std::size_t>(c.cluster_count()));
  for (std::size_t v = 0; v < c.cluster_of.size(); ++v) {
    out[static_cast<std::size_t>(c.cluster_of[v])].push_back(static_cast<int>(v));
  }
  return out;
}

Partition Partition::canonical() const {
  std::map<int, int> relabel;
  Partition out;
  out.cluster_of.reserve(cluster_of.size());
  for (int c : cluster_of) {
    auto [it, inserted] = relabel.emplace(c, static_cast<int>(relabel.size()));
    out.cluster_of.push_back(it->second);
  }
  return out;
}

Partition Partition::singletons(int n) {
  Partition p;
  p.cluster_of.resize(static_cast<std::size_t>(n));
  std::iota(p.cluster_of.begin(), p.cluster_of.end(), 0);
  return p;
}

namespace {

// Connectivity of members in g, using marks[] == stamp as the membership test.
bool connected_members(const TrackletGraph& g, const std::vector<int>& members,
                       std::vector<int>& marks, int& stamp) {
  if (members.size() <= 1) return true;
  ++stamp;
  const int in_set = stamp;
  for (int v : members) marks[static_cast<std::size_t>(v)] = in_set;
  ++stamp;
  const int seen = stamp;
  std::vector<int> stack{members.front()};
  marks[static_cast<std::size_t>(members.front())] = seen;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& [n, e] : g.neighbors(v)) {
      (void)e;
      if (marks[static_cast<std::size_t>(n)] == in_set) {
        marks[static_cast<std::size_t>(n)] = seen;
        ++reached;
        stack.push_back(n);
      }
    }
  }
  return reached == members.size();
}

}  // namespace

std::optional<std::string> feasibility_violation(const TrackletGraph& g, const Partition& part) {
  if (static_cast<int>(part.cluster_of.size()) != g.size()) {
    return "partition covers " + std::to_string(part.cluster_of.size()) + " vertices, graph has " +
           std::to_string(g.size());
  }
  for (const GraphEdge& e : g.edges()) {
    if (part.cluster_of[static_cast<std::size_t>(e.u)] == part.cluster_of[static_cast<std::size_t>(e.w)] &&
        e.p == 0.0) {
      return "cluster holds forbidden edge (" + std::to_string(e.u) + "," + std::to_string(e.w) + ")";
    }
  }
  std::vector<int> marks(static_cast<std::size_t>(g.size()), 0);
  int stamp = 0;
  for (const std::vector<int>& members : part.clusters()) {
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        if (time_overlap(g.vertices()[static_cast<std::size_t>(members[i])],
                         g.vertices()[static_cast<std::size_t>(members[j])])) {
          return "vertices " + std::to_string(members[i]) + " and " + std::to_string(members[j]) +
                 " overlap in time within one cluster";
        }
      }
    }
    if (!connected_members(g, members, marks, stamp)) {
      return "cluster containing vertex " + std::to_string(members.front()) + " is disconnected";
    }
  }
  return std::nullopt;
}

double objective(const TrackletGraph& g, const Partition& part) {
  if (auto why = feasibility_violation(g, part)) fail(ErrorKind::kFeasibility, *why);
  double total = 0.0;
  for (const GraphEdge& e : g.edges()) {
    const bool same = part.cluster_of[static_cast<std::size_t>(e.u)] ==
                      part.cluster_of[static_cast<std::size_t>(e.w)];
    total += same ? e.cost : -e.cost;
  }
  return total;
}

namespace {

enum MoveType { kAssign = 0, kMerge = 1, kSplit = 2, kSwitch = 3, kBreak = 4 };

struct Move {
  MoveType type = kAssign;
  double delta = 0.0;  // change of the intra-cluster cost sum
  int vertex = -1;
  int a = -1;
  int b = -1;      // target cluster; -1 for a new one
  int pivot = 0;   // split position or switch frame
};

// Greedy state. Minimizing the objective is the same as minimizing the sum
// of intra-cluster edge costs, since objective = 2 * intra - sum of all costs.
class Searcher {
 public:
  explicit Searcher(const TrackletGraph& g)
      : g_(g), marks_(static_cast<std::size_t>(g.size()), 0) {
    const Partition p = Partition::singletons(g.size());
    cluster_of_ = p.cluster_of;
    for (int v = 0; v < g.size(); ++v) members_.push_back({v});
  }

  std::optional<Move> best_move() {
    std::optional<Move> best;
    const auto offer = [&best](const Move& m) {
      if (m.delta < (best ? best->delta : 0.0) - 1e-12) best = m;
    };
    assign_moves(offer);
    const auto pairs = adjacent_pairs();
    for (const auto& [a, b] : pairs) merge_move(a, b, offer);
    for (int a = 0; a < static_cast<int>(members_.size()); ++a) split_moves(a, offer);
    for (const auto& [a, b] : pairs) switch_moves(a, b, offer);
    for (int a = 0; a < static_cast<int>(members_.size()); ++a) break_move(a, offer);
    return best;
  }

  void apply(const Move& m) {
    switch (m.type) {
      case kAssign: {
        auto& from = members_[static_cast<std::size_t>(cluster_of_[static_cast<std::size_t>(m.vertex)])];
        from.erase(std::find(from.begin(), from.end(), m.vertex));
        place(m.vertex, m.b < 0 ? new_cluster() : m.b);
        break;
      }
      case kMerge: {
        const std::vector<int> moving = members_[static_cast<std::size_t>(m.b)];
        members_[static_cast<std::size_t>(m.b)].clear();
        for (int v : moving) place(v, m.a);
        break;
      }
      case kSplit: {
        const std::vector<int> sorted = by_start(members_[static_cast<std::size_t>(m.a)]);
        const int fresh = new_cluster();
        members_[static_cast<std::size_t>(m.a)].assign(sorted.begin(), sorted.begin() + m.pivot);
        for (auto it = sorted.begin() + m.pivot; it != sorted.end(); ++it) place(*it, fresh);
        break;
      }
      case kSwitch: {
        auto [a1, a2] = cut(members_[static_cast<std::size_t>(m.a)], m.pivot);
        auto [b1, b2] = cut(members_[static_cast<std::size_t>(m.b)], m.pivot);
        members_[static_cast<std::size_t>(m.a)] = a1;
        members_[static_cast<std::size_t>(m.b)] = b1;
        for (int v : b2) place(v, m.a);
        for (int v : a2) place(v, m.b);
        break;
      }
      case kBreak: {
        const std::vector<int> all = members_[static_cast<std::size_t>(m.a)];
        members_[static_cast<std::size_t>(m.a)] = {all.front()};
        for (std::size_t i = 1; i < all.size(); ++i) place(all[i], new_cluster());
        break;
      }
    }
    for (auto& mem : members_) std::sort(mem.begin(), mem.end());
  }

  Partition partition() const { return Partition{cluster_of_}.canonical(); }

 private:
  int start(int v) const { return g_.vertices()[static_cast<std::size_t>(v)].first_frame(); }
  int end(int v) const { return g_.vertices()[static_cast<std::size_t>(v)].last_frame(); }

  int new_cluster() {
    members_.emplace_back();
    return static_cast<int>(members_.size()) - 1;
  }
  void place(int v, int c) {
    cluster_of_[static_cast<std::size_t>(v)] = c;
    members_[static_cast<std::size_t>(c)].push_back(v);
  }

  std::vector<int> by_start(std::vector<int> vs) const {
    std::sort(vs.begin(), vs.end(), [this](int x, int y) {
      return std::make_pair(start(x), x) < std::make_pair(start(y), y);
    });
    return vs;
  }

  // Members starting at or before frame t, and the rest.
  std::pair<std::vector<int>, std::vector<int>> cut(const std::vector<int>& vs, int t) const {
    std::pair<std::vector<int>, std::vector<int>> out;
    for (int v : vs) (start(v) <= t ? out.first : out.second).push_back(v);
    return out;
  }

  int mark(const std::vector<int>& vs) {
    ++stamp_;
    for (int v : vs) marks_[static_cast<std::size_t>(v)] = stamp_;
    return stamp_;
  }

  // Sum of costs between xs and ys; sets forbidden when a p = 0 edge or a
  // time overlap joins them.
  double cross(const std::vector<int>& xs, const std::vector<int>& ys, bool* forbidden = nullptr) {
    const int s = mark(ys);
    double total = 0.0;
    for (int x : xs) {
      for (const auto& [n, e] : g_.neighbors(x)) {
        if (marks_[static_cast<std::size_t>(n)] != s) continue;
        const GraphEdge& edge = g_.edges()[static_cast<std::size_t>(e)];
        total += edge.cost;
        if (forbidden && edge.p == 0.0) *forbidden = true;
      }
    }
    if (forbidden && !*forbidden) {
      for (int x : xs) {
        for (int y : ys) {
          if (start(x) <= end(y) && start(y) <= end(x)) {
            *forbidden = true;
            return total;
          }
        }
      }
    }
    return total;
  }

  double intra(const std::vector<int>& xs) {
    const int s = mark(xs);
    double total = 0.0;
    for (int x : xs) {
      for (const auto& [n, e] : g_.neighbors(x)) {
        if (n > x && marks_[static_cast<std::size_t>(n)] == s) {
          total += g_.edges()[static_cast<std::size_t>(e)].cost;
        }
      }
    }
    return total;
  }

  bool connected(const std::vector<int>& xs) { return connected_members(g_, xs, marks_, stamp_); }

  std::set<std::pair<int, int>> adjacent_pairs() const {
    std::set<std::pair<int, int>> out;
    for (const GraphEdge& e : g_.edges()) {
      const int a = cluster_of_[static_cast<std::size_t>(e.u)];
      const int b = cluster_of_[static_cast<std::size_t>(e.w)];
      if (a != b) out.emplace(std::min(a, b), std::max(a, b));
    }
    return out;
  }

  template <typename Offer>
  void assign_moves(Offer& offer) {
    for (int v = 0; v < g_.size(); ++v) {
      const int a = cluster_of_[static_cast<std::size_t>(v)];
      std::map<int, double> to_cluster;  // cluster -> sum of costs from v
      for (const auto& [n, e] : g_.neighbors(v)) {
        to_cluster[cluster_of_[static_cast<std::size_t>(n)]] += g_.edges()[static_cast<std::size_t>(e)].cost;
      }
      const double stay = to_cluster.count(a) ? to_cluster[a] : 0.0;
      const auto& from = members_[static_cast<std::size_t>(a)];
      if (from.size() > 1) {
        std::vector<int> rest;
        for (int x : from) {
          if (x != v) rest.push_back(x);
        }
        if (!connected(rest)) continue;
      }
      for (const auto& [b, cost] : to_cluster) {
        if (b == a) continue;
        Move m{kAssign, cost - stay, v, a, b, 0};
        if (!(m.delta < 0.0)) continue;
        bool forbidden = false;
        cross({v}, members_[static_cast<std::size_t>(b)], &forbidden);
        if (!forbidden) offer(m);
      }
      if (from.size() > 1) offer(Move{kAssign, -stay, v, a, -1, 0});
    }
  }

  template <typename Offer>
  void merge_move(int a, int b, Offer& offer) {
    bool forbidden = false;
    const double delta =
        cross(members_[static_cast<std::size_t>(a)], members_[static_cast<std::size_t>(b)], &forbidden);
    if (!forbidden) offer(Move{kMerge, delta, -1, a, b, 0});
  }

  template <typename Offer>
  void split_moves(int a, Offer& offer) {
    const auto& mem = members_[static_cast<std::size_t>(a)];
    if (mem.size() < 2) return;
    const std::vector<int> sorted = by_start(mem);
    for (std::size_t k = 1; k < sorted.size(); ++k) {
      const std::vector<int> head(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k));
      const std::vector<int> tail(sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
      const double delta = -cross(head, tail);
      if (!(delta < 0.0)) continue;
      if (connected(head) && connected(tail)) offer(Move{kSplit, delta, -1, a, -1, static_cast<int>(k)});
    }
  }

  template <typename Offer>
  void switch_moves(int a, int b, Offer& offer) {
    const auto& ma = members_[static_cast<std::size_t>(a)];
    const auto& mb = members_[static_cast<std::size_t>(b)];
    std::set<int> pivots;
    for (int v : ma) pivots.insert(end(v));
    for (int v : mb) pivots.insert(end(v));
    for (int t : pivots) {
      auto [a1, a2] = cut(ma, t);
      auto [b1, b2] = cut(mb, t);
      if (a2.empty() && b2.empty()) continue;  // nothing moves
      if (a1.empty() && b1.empty()) continue;  // relabeling only
      if ((a1.empty() && b2.empty()) || (b1.empty() && a2.empty())) continue;  // a merge
      const double delta = cross(a1, b2) + cross(b1, a2) - cross(a1, a2) - cross(b1, b2);
      if (!(delta < 0.0)) continue;
      bool forbidden = false;
      cross(a1, b2, &forbidden);
      cross(b1, a2, &forbidden);
      if (forbidden) continue;
      std::vector<int> x = a1, y = b1;
      x.insert(x.end(), b2.begin(), b2.end());
      y.insert(y.end(), a2.begin(), a2.end());
      if (connected(x) && connected(y)) offer(Move{kSwitch, delta, -1, a, b, t});
    }
  }

  template <typename Offer>
  void break_move(int a, Offer& offer) {
    const auto& mem = members_[static_cast<std::size_t>(a)];
    if (mem.size() < 2) return;
    offer(Move{kBreak, -intra(mem), -1, a, -1, 0});
  }

  const TrackletGraph& g_;
  std::vector<int> cluster_of_;
  std::vector<std::vector<int>> members_;
  std::vector<int> marks_;
  int stamp_ = 0;
};

}  // namespace

Partition cluster(const TrackletGraph& g, std::uint64_t seed, ClusterStats* stats) {
  (void)seed;
  Searcher search(g);
  ClusterStats local;
  // Every applied move lowers the objective, so this only guards against
  // rounding cycles.
  const long max_rounds = 1000L + 100L * g.size() * std::max(1, g.size());
  while (local.rounds < max_rounds) {
    const std::optional<Move> m = search.best_move();
    if (!m) break;
    search.apply(*m);
    ++local.rounds;
    ++local.applied[static_cast<std::size_t>(m->type)];
  }
  if (stats) *stats = local;
  return search.partition();
}

std::vector<Trajectory> emit_trajectories(const Partition& part,
                                          const std::vector<Tracklet>& tracklets) {
  if (part.cluster_of.size() != tracklets.size()) {
    fail(ErrorKind::kInvalidArgument, "partition and tracklet list differ in size");
  }
  std::vector<Trajectory> out;
  int next_id = 1;
  for (std::vector<int> members : part.clusters()) {
    std::sort(members.begin(), members.end(), [&](int x, int y) {
      return tracklets[static_cast<std::size_t>(x)].first_frame() <
             tracklets[static_cast<std::size_t>(y)].first_frame();
    });
    Trajectory traj;
    traj.object_id = next_id++;
    for (int m : members) {
      const Tracklet& t = tracklets[static_cast<std::size_t>(m)];
      if (!traj.points.empty()) {
        const Detection prev = traj.points.back().detection;
        const Detection& next = t.detections.front();
        if (next.frame <= prev.frame) {
          fail(ErrorKind::kFeasibility, "cluster members overlap in time");
        }
        const double span = next.frame - prev.frame;
        for (int f = prev.frame + 1; f < next.frame; ++f) {
          const double s = (f - prev.frame) / span;
          Detection d;
          d.frame = f;
          d.box.cx = prev.box.cx + s * (next.box.cx - prev.box.cx);
          d.box.cy = prev.box.cy + s * (next.box.cy - prev.box.cy);
          d.box.w = prev.box.w + s * (next.box.w - prev.box.w);
          d.box.h = prev.box.h + s * (next.box.h - prev.box.h);
          d.confidence = 0.0;
          d.feature = (f - prev.frame <= next.frame - f) ? prev.feature : next.feature;
          traj.points.push_back({std::move(d), true});
        }
      }
      for (const Detection& d : t.detections) traj.points.push_back({d, false});
    }
    out.push_back(std::move(traj));
  }
  return out;
}

namespace {

std::optional<std::vector<double>> as_distribution(const Tracklet& t) {
  if (t.detections.empty()) return std::nullopt;
  std::vector<double> mean(t.detections.front().feature.size(), 0.0);
  for (const Detection& d : t.detections) {
    for (std::size_t i = 0; i < mean.size() && i < d.feature.size(); ++i) mean[i] += d.feature.values[i];
  }
  if (mean.empty()) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
  const double low = *lo;
  if (!(*hi - low > 0.0)) return std::nullopt;
  double sum = 0.0;
  for (double& v : mean) sum += (v -= low);
  for (double& v : mean) v /= sum;
  return mean;
}

}  // namespace

double bhattacharyya_scorer(const Tracklet& u, const Tracklet& w) {
  const auto p = as_distribution(u);
  const auto q = as_distribution(w);
  if (!p || !q || p->size() != q->size()) return 0.5;
  double bc = 0.0;
  for (std::size_t i = 0; i < p->size(); ++i) bc += std::sqrt((*p)[i] * (*q)[i]);
  return std::clamp(bc, 0.0, 1.0);
}

}  // namespace tnt
