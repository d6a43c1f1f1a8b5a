#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clustergraph/clustering.hpp"
#include "clustergraph/error.hpp"
#include "clustergraph/geodesics.hpp"
#include "clustergraph/graph_build.hpp"
#include "clustergraph/model.hpp"
#include "clustergraph/parallel.hpp"
#include "clustergraph/random.hpp"

namespace clustergraph {

/// |ln(d_cg / d_k)|. Both arguments must be positive and finite.
inline double pair_distortion(double d_cg, double d_k) {
  if (!(d_cg > 0.0) || !(d_k > 0.0) || !std::isfinite(d_cg) || !std::isfinite(d_k)) {
    throw internal_error("pair distortion needs positive finite distances (got " + std::to_string(d_cg) +
                         ", " + std::to_string(d_k) + ")");
  }
  return std::abs(std::log(d_cg / d_k));
}

/// |C_i u C_j| / ((n - 1) |X|).
inline double pair_weight(std::size_t union_size, std::size_t n, std::size_t point_count) {
  if (n < 2) throw config_error("pair weight needs at least two vertices");
  if (point_count == 0) throw config_error("pair weight needs a nonempty dataset");
  return static_cast<double>(union_size) / (static_cast<double>(n - 1) * static_cast<double>(point_count));
}

struct PairScore {
  double delta = 0.0;
  double weight = 0.0;
  std::size_t pair_count = 0;
};

struct DistortionReport {
  /// Every vertex pair sharing a geodesic component, adjacent or not.
  std::map<EdgeKey, PairScore> pair_scores;
  std::map<int, double> per_component;
  /// Point-count-weighted mean of the per-component values.
  double global = 0.0;
  std::size_t k_used = 0;
  std::string aggregation = "point_weighted_mean";
  /// True when cross pairs were subsampled for at least one vertex pair.
  bool sampled = false;
};

struct ScoringOptions {
  /// Cap on cross pairs evaluated per vertex pair; 0 evaluates all of them.
  std::size_t max_pairs = 0;
  std::uint64_t seed = 0;
  /// Evaluate every point pair individually instead of through prefix sums.
  bool naive = false;
  Parallelism parallelism;
};

/// Component-level result of a scoring pass. Values are +infinity when some vertex
/// pair of the component has no finite d_CG.
struct ComponentScores {
  std::map<int, double> per_component;
  double global = 0.0;
};

/// Precomputes, for every vertex pair inside a geodesic component, the estimated
/// geodesic distances of its cross point pairs, so that the distortion of any edge set
/// only needs the vertex-level shortest-path matrix.
///
/// For partitions d_CG is constant over a vertex pair, so the pair keeps its sorted
/// ln d_X^k values with prefix sums and delta for a path length L is
/// mean |ln L - ln d_k| in O(log m). Divisions (or naive mode) store the point pairs and
/// minimize d_CG over the vertices containing each point.
///
/// Excluded point pairs: x == y, pairs sharing a cluster (d_CG = 0), and coincident
/// points (d_X^k = 0).
class DistortionScorer {
 public:
  DistortionScorer(const ClusterGraphModel& graph, const GeodesicIndex& index, ScoringOptions options = {})
      : options_(options), k_used_(index.k()) {
    const std::size_t n = graph.vertex_count();
    const std::size_t point_count = index.size();
    membership_ = point_vertices(graph, point_count);
    bool overlapping = false;
    for (const auto& list : membership_) overlapping = overlapping || list.size() > 1;
    factorized_ = !overlapping && !options_.naive;

    component_.resize(n);
    for (VertexId v = 0; v < n; ++v) component_[v] = graph.vertex(v).component;
    std::map<int, std::vector<VertexId>> groups;
    for (VertexId v = 0; v < n; ++v) groups[component_[v]].push_back(v);
    for (const auto& [c, verts] : groups) {
      std::vector<PointId> points;
      for (VertexId v : verts) {
        const auto& m = graph.vertex(v).members;
        points.insert(points.end(), m.begin(), m.end());
      }
      std::sort(points.begin(), points.end());
      points.erase(std::unique(points.begin(), points.end()), points.end());
      components_.push_back(ComponentInfo{c, verts, points.size(), {}});
    }

    for (VertexId a = 0; a < n; ++a) {
      for (VertexId b = a + 1; b < n; ++b) {
        if (component_[a] == component_[b]) pairs_.push_back(PairData{EdgeKey{a, b}, 0.0, {}, {}, {}, false});
      }
    }
    for (auto& info : components_) {
      for (std::size_t slot = 0; slot < pairs_.size(); ++slot) {
        if (component_[pairs_[slot].key.first] == info.id) info.pair_slots.push_back(slot);
      }
    }

    parallel_for(pairs_.size(), options_.parallelism, [&](std::size_t slot) { prepare(graph, index, slot); });

    for (const auto& info : components_) {
      if (info.vertices.size() < 2) continue;
      for (std::size_t slot : info.pair_slots) {
        PairData& pd = pairs_[slot];
        const auto& a = graph.vertex(pd.key.first).members;
        const auto& b = graph.vertex(pd.key.second).members;
        std::vector<PointId> both;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
        pd.weight = pair_weight(both.size(), info.vertices.size(), info.point_count);
      }
    }
  }

  bool factorized() const noexcept { return factorized_; }
  std::size_t k_used() const noexcept { return k_used_; }

  /// delta for the vertex pair given the vertex-level shortest-path matrix.
  double delta(VertexId a, VertexId b, const DistanceMatrix& paths) const {
    return evaluate(pairs_.at(slot_of(a, b)), paths);
  }

  std::size_t pair_count(VertexId a, VertexId b) const { return count_of(pairs_.at(slot_of(a, b))); }

  ComponentScores score(const DistanceMatrix& paths) const {
    ComponentScores out;
    double weighted = 0.0;
    double total_points = 0.0;
    for (const auto& info : components_) {
      double value = 0.0;
      const std::size_t n = info.vertices.size();
      if (n >= 2) {
        double sum = 0.0;
        for (std::size_t slot : info.pair_slots) {
          const PairData& pd = pairs_[slot];
          sum += pd.weight * evaluate(pd, paths);
        }
        value = 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1)) * sum;
      }
      out.per_component[info.id] = value;
      weighted += static_cast<double>(info.point_count) * value;
      total_points += static_cast<double>(info.point_count);
    }
    out.global = total_points > 0.0 ? weighted / total_points : 0.0;
    return out;
  }

  /// Full report; throws when a component's distortion is not finite.
  DistortionReport report(const DistanceMatrix& paths) const {
    DistortionReport r;
    r.k_used = k_used_;
    for (const auto& pd : pairs_) {
      const double d = evaluate(pd, paths);
      if (!std::isfinite(d)) {
        throw internal_error("vertex pair (" + std::to_string(pd.key.first) + ", " +
                             std::to_string(pd.key.second) +
                             ") has no finite ClusterGraph distance inside its component");
      }
      r.pair_scores[pd.key] = PairScore{d, pd.weight, count_of(pd)};
      r.sampled = r.sampled || pd.sampled;
    }
    const ComponentScores s = score(paths);
    r.per_component = s.per_component;
    r.global = s.global;
    return r;
  }

 private:
  struct PointPair {
    PointId x;
    PointId y;
    double log_dk;
  };

  struct PairData {
    EdgeKey key;
    double weight;
    std::vector<double> sorted_logs;  // factorized mode
    std::vector<double> prefix;       // prefix[i] = sum of the first i sorted logs
    std::vector<PointPair> points;    // point-level mode
    bool sampled;
  };

  struct ComponentInfo {
    int id;
    std::vector<VertexId> vertices;
    std::size_t point_count;
    std::vector<std::size_t> pair_slots;
  };

  std::size_t slot_of(VertexId a, VertexId b) const {
    const EdgeKey key = make_edge_key(a, b);
    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key,
                               [](const PairData& pd, const EdgeKey& k) { return pd.key < k; });
    if (it == pairs_.end() || it->key != key) {
      throw config_error("vertices " + std::to_string(a) + " and " + std::to_string(b) +
                         " are not in the same geodesic component");
    }
    return static_cast<std::size_t>(it - pairs_.begin());
  }

  std::size_t count_of(const PairData& pd) const {
    return factorized_ ? pd.sorted_logs.size() : pd.points.size();
  }

  bool share_cluster(PointId x, PointId y) const {
    const auto& vx = membership_[x];
    const auto& vy = membership_[y];
    std::size_t i = 0, j = 0;
    while (i < vx.size() && j < vy.size()) {
      if (vx[i] == vy[j]) return true;
      if (vx[i] < vy[j]) ++i; else ++j;
    }
    return false;
  }

  void prepare(const ClusterGraphModel& graph, const GeodesicIndex& index, std::size_t slot) {
    PairData& pd = pairs_[slot];
    const auto& a = graph.vertex(pd.key.first).members;
    const auto& b = graph.vertex(pd.key.second).members;
    std::vector<PointPair> pairs;
    for (PointId x : a) {
      const auto row = index.distances_from(x);
      for (PointId y : b) {
        if (x == y || share_cluster(x, y)) continue;
        const double dk = (*row)[y];
        if (dk == 0.0) continue;
        if (!std::isfinite(dk)) {
          throw internal_error("points " + std::to_string(x) + " and " + std::to_string(y) +
                               " of one component have no finite geodesic distance");
        }
        pairs.push_back({x, y, std::log(dk)});
      }
    }
    if (pairs.empty()) {
      throw input_error("clusters '" + graph.vertex(pd.key.first).id + "' and '" + graph.vertex(pd.key.second).id +
                        "' have no valid point pairs for distortion");
    }
    if (options_.max_pairs > 0 && pairs.size() > options_.max_pairs) {
      Rng rng(mix_seed(options_.seed, pd.key.first * 1000003ULL + pd.key.second));
      for (std::size_t i = 0; i < options_.max_pairs; ++i) {
        std::swap(pairs[i], pairs[i + rng.below(pairs.size() - i)]);
      }
      pairs.resize(options_.max_pairs);
      std::sort(pairs.begin(), pairs.end(),
                [](const PointPair& l, const PointPair& r) { return std::tie(l.x, l.y) < std::tie(r.x, r.y); });
      pd.sampled = true;
    }
    if (factorized_) {
      pd.sorted_logs.reserve(pairs.size());
      for (const auto& pp : pairs) pd.sorted_logs.push_back(pp.log_dk);
      std::sort(pd.sorted_logs.begin(), pd.sorted_logs.end());
      pd.prefix.assign(pd.sorted_logs.size() + 1, 0.0);
      for (std::size_t i = 0; i < pd.sorted_logs.size(); ++i) pd.prefix[i + 1] = pd.prefix[i] + pd.sorted_logs[i];
    } else {
      pd.points = std::move(pairs);
    }
  }

  double evaluate(const PairData& pd, const DistanceMatrix& paths) const {
    if (factorized_) {
      const double length = paths(pd.key.first, pd.key.second);
      if (!std::isfinite(length)) return kInfinity;
      if (!(length > 0.0)) {
        throw input_error("zero ClusterGraph distance between vertices " + std::to_string(pd.key.first) +
                          " and " + std::to_string(pd.key.second));
      }
      const double log_length = std::log(length);
      const std::size_t m = pd.sorted_logs.size();
      const auto below = static_cast<std::size_t>(
          std::upper_bound(pd.sorted_logs.begin(), pd.sorted_logs.end(), log_length) - pd.sorted_logs.begin());
      const double lower_sum = pd.prefix[below];
      const double upper_sum = pd.prefix[m] - lower_sum;
      const double total = log_length * static_cast<double>(below) - lower_sum + upper_sum -
                           log_length * static_cast<double>(m - below);
      return std::max(0.0, total / static_cast<double>(m));
    }
    double sum = 0.0;
    for (const PointPair& pp : pd.points) {
      double d_cg = kInfinity;
      for (VertexId u : membership_[pp.x]) {
        for (VertexId v : membership_[pp.y]) d_cg = std::min(d_cg, paths(u, v));
      }
      if (!std::isfinite(d_cg)) return kInfinity;
      if (!(d_cg > 0.0)) {
        throw input_error("zero ClusterGraph distance between points " + std::to_string(pp.x) + " and " +
                          std::to_string(pp.y));
      }
      sum += std::abs(std::log(d_cg) - pp.log_dk);
    }
    return sum / static_cast<double>(pd.points.size());
  }

  ScoringOptions options_;
  std::size_t k_used_;
  bool factorized_ = true;
  std::vector<std::vector<VertexId>> membership_;
  std::vector<int> component_;
  std::vector<ComponentInfo> components_;
  std::vector<PairData> pairs_;  // sorted by key
};

namespace detail {

inline void require_matching(const ClusterGraphModel& graph, const Clustering& clustering) {
  if (clustering.size() != graph.vertex_count()) {
    throw input_error("clustering has " + std::to_string(clustering.size()) + " clusters but the graph has " +
                      std::to_string(graph.vertex_count()) + " vertices");
  }
  for (std::size_t c = 0; c < clustering.size(); ++c) {
    const auto& v = graph.vertex(c);
    const auto members = clustering.members(c);
    if (v.id != clustering.id(c) || !std::equal(members.begin(), members.end(), v.members.begin(), v.members.end())) {
      throw input_error("cluster '" + clustering.id(c) + "' does not match graph vertex '" + v.id + "'");
    }
  }
}

}  // namespace detail

struct EdgeDistortion {
  double delta = 0.0;
  std::size_t pair_count = 0;
};

/// delta for one vertex pair, evaluated point pair by point pair.
inline EdgeDistortion edge_distortion(const ClusterGraphModel& graph, const Clustering& clustering,
                                      const GeodesicIndex& index, VertexId i, VertexId j) {
  detail::require_matching(graph, clustering);
  if (i == j) throw config_error("edge distortion needs two distinct vertices");
  if (graph.vertex(i).component != graph.vertex(j).component) {
    throw config_error("vertices '" + graph.vertex(i).id + "' and '" + graph.vertex(j).id +
                       "' are in different geodesic components");
  }
  const auto membership = point_vertices(graph, index.size());
  const auto paths = graph.shortest_paths();
  double sum = 0.0;
  std::size_t count = 0;
  for (PointId x : graph.vertex(i).members) {
    for (PointId y : graph.vertex(j).members) {
      if (x == y) continue;
      const auto& vx = membership[x];
      const auto& vy = membership[y];
      const bool shared = std::find_first_of(vx.begin(), vx.end(), vy.begin(), vy.end()) != vx.end();
      const double d_k = index.distance(x, y);
      if (shared || d_k == 0.0) continue;
      double d_cg = kInfinity;
      for (VertexId u : vx) {
        for (VertexId v : vy) d_cg = std::min(d_cg, (*paths)(u, v));
      }
      sum += pair_distortion(d_cg, d_k);
      ++count;
    }
  }
  if (count == 0) {
    throw input_error("clusters '" + graph.vertex(i).id + "' and '" + graph.vertex(j).id +
                      "' have no valid point pairs for distortion");
  }
  return {sum / static_cast<double>(count), count};
}

inline DistortionReport global_distortion(const ClusterGraphModel& graph, const Clustering& clustering,
                                          const GeodesicIndex& index, ScoringOptions options = {}) {
  detail::require_matching(graph, clustering);
  const DistortionScorer scorer(graph, index, options);
  return scorer.report(*graph.shortest_paths());
}

/// Copies the report's delta values onto the graph's existing edges and records the
/// global distortion in the graph metadata.
inline ClusterGraphModel annotate_distortion(ClusterGraphModel graph, const DistortionReport& report) {
  for (const auto& [key, e] : graph.edges()) {
    auto it = report.pair_scores.find(key);
    graph.set_distortion(key.first, key.second,
                         it == report.pair_scores.end() ? std::nullopt : std::optional<double>(it->second.delta));
  }
  graph.set_global_distortion(report.global);
  return graph;
}

}  // namespace clustergraph
