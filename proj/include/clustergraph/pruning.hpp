#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clustergraph/clustering.hpp"
#include "clustergraph/distortion.hpp"
#include "clustergraph/error.hpp"
#include "clustergraph/geodesics.hpp"
#include "clustergraph/metrics.hpp"
#include "clustergraph/model.hpp"
#include "clustergraph/parallel.hpp"
#include "clustergraph/point_cloud.hpp"

namespace clustergraph {

enum class StopReason { threshold_reached, no_improving_edge, step_budget, connectivity_floor };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::threshold_reached:
      return "threshold_reached";
    case StopReason::no_improving_edge:
      return "no_improving_edge";
    case StopReason::step_budget:
      return "step_budget";
    case StopReason::connectivity_floor:
      return "connectivity_floor";
  }
  return "unknown";
}

struct PruneStep {
  EdgeKey edge;
  /// delta of the edge (threshold), global distortion after removal (greedy), or
  /// connectivity kept relative to the original edge set (connectivity).
  double criterion = 0.0;
  /// Connectivity pruning only: conn(E \ {e}) / conn(E) against the current edge set.
  std::optional<double> step_ratio;
  std::size_t components = 0;
};

struct PruneTrace {
  std::string strategy;
  /// Value before any removal: global distortion (greedy) or connectivity (connectivity).
  std::optional<double> initial_value;
  std::vector<PruneStep> steps;
  StopReason stop = StopReason::no_improving_edge;
};

struct PruneResult {
  ClusterGraphModel graph;
  PruneTrace trace;
};

// ---------------------------------------------------------------------------
// Threshold pruning

/// Keeps exactly the edges with delta <= alpha. Removal steps are listed by decreasing
/// delta (ties by edge key). Disconnection is allowed.
inline PruneResult threshold_prune(const ClusterGraphModel& graph, const std::map<EdgeKey, double>& distortions,
                                   double alpha) {
  if (!(alpha > 0.0) || std::isnan(alpha)) throw config_error("threshold alpha must be positive");
  std::vector<std::pair<double, EdgeKey>> doomed;
  for (const auto& [key, e] : graph.edges()) {
    auto it = distortions.find(key);
    if (it == distortions.end() || !std::isfinite(it->second)) {
      throw config_error("edge ('" + graph.vertex(key.first).id + "', '" + graph.vertex(key.second).id +
                         "') carries no distortion value");
    }
    if (it->second > alpha) doomed.emplace_back(it->second, key);
  }
  std::sort(doomed.begin(), doomed.end(), [](const auto& l, const auto& r) {
    return l.first != r.first ? l.first > r.first : l.second < r.second;
  });
  PruneResult result{graph, {}};
  result.trace.strategy = "threshold";
  for (const auto& [delta, key] : doomed) {
    result.graph.remove_edge(key.first, key.second);
    result.trace.steps.push_back(
        PruneStep{key, delta, std::nullopt, component_count(connected_components(result.graph))});
  }
  result.trace.stop = StopReason::threshold_reached;
  return result;
}

/// Threshold pruning on the distortion values stored on the edges.
inline PruneResult threshold_prune(const ClusterGraphModel& graph, double alpha) {
  std::map<EdgeKey, double> distortions;
  for (const auto& [key, e] : graph.edges()) {
    if (e.distortion) distortions.emplace(key, *e.distortion);
  }
  return threshold_prune(graph, distortions, alpha);
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace detail {

/// Shortest paths after deleting `removed` from a graph whose current paths are `paths`.
/// An edge heavier than the current distance between its endpoints lies on no shortest
/// path, so the matrix is reused verbatim; otherwise the removed edge's connected
/// component is recomputed.
inline DistanceMatrix paths_without(const ClusterGraphModel& graph, const DistanceMatrix& paths,
                                    const std::vector<int>& connected, EdgeKey removed) {
  const double w = graph.edges().at(removed).weight;
  if (w > paths(removed.first, removed.second)) return paths;

  const int comp = connected[removed.first];
  std::vector<VertexId> block;
  for (VertexId v = 0; v < connected.size(); ++v) {
    if (connected[v] == comp) block.push_back(v);
  }
  DistanceMatrix sub(block.size(), kInfinity);
  std::vector<std::size_t> local(connected.size(), 0);
  for (std::size_t s = 0; s < block.size(); ++s) {
    local[block[s]] = s;
    sub(s, s) = 0.0;
  }
  for (const auto& [key, e] : graph.edges()) {
    if (key == removed || connected[key.first] != comp) continue;
    sub(local[key.first], local[key.second]) = e.weight;
    sub(local[key.second], local[key.first]) = e.weight;
  }
  sub = floyd_warshall(std::move(sub));
  DistanceMatrix out = paths;
  for (std::size_t s = 0; s < block.size(); ++s) {
    for (std::size_t t = 0; t < block.size(); ++t) out(block[s], block[t]) = sub(s, t);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Iterative greedy pruning

struct GreedyOptions {
  /// Maximum number of removals; unbounded when empty.
  std::optional<std::size_t> max_steps;
  /// Scoring configuration; `scoring.naive` switches to point-level re-evaluation.
  ScoringOptions scoring;
  Parallelism parallelism;
};

/// Repeatedly removes the edge whose removal yields the smallest global distortion,
/// provided that value does not exceed the current one. Bridges are skipped (their
/// removal makes the distortion infinite), so components never split.
inline PruneResult greedy_prune(const ClusterGraphModel& graph, const Clustering& clustering,
                                const GeodesicIndex& index, const GreedyOptions& options = {}) {
  detail::require_matching(graph, clustering);
  const DistortionScorer scorer(graph, index, options.scoring);
  PruneResult result{graph, {}};
  result.trace.strategy = "greedy";
  DistanceMatrix paths = *graph.shortest_paths();
  double current = scorer.score(paths).global;
  if (!std::isfinite(current)) {
    throw input_error("greedy pruning needs a graph whose geodesic components are connected");
  }
  result.trace.initial_value = current;

  for (;;) {
    if (options.max_steps && result.trace.steps.size() >= *options.max_steps) {
      result.trace.stop = StopReason::step_budget;
      break;
    }
    const auto connected = connected_components(result.graph);
    const auto bridge_set = bridges(result.graph);
    std::vector<EdgeKey> candidates;
    for (const auto& [key, e] : result.graph.edges()) {
      if (!bridge_set.count(key)) candidates.push_back(key);
    }
    std::vector<double> after(candidates.size());
    parallel_for(candidates.size(), options.parallelism, [&](std::size_t t) {
      after[t] = scorer.score(detail::paths_without(result.graph, paths, connected, candidates[t])).global;
    });

    std::optional<std::size_t> best;
    for (std::size_t t = 0; t < candidates.size(); ++t) {
      if (!(after[t] <= current)) continue;
      if (!best || after[t] < after[*best]) best = t;
    }
    if (!best) {
      result.trace.stop = StopReason::no_improving_edge;
      break;
    }
    const EdgeKey chosen = candidates[*best];
    paths = detail::paths_without(result.graph, paths, connected, chosen);
    result.graph.remove_edge(chosen.first, chosen.second);
    current = after[*best];
    result.trace.steps.push_back(
        PruneStep{chosen, current, std::nullopt, component_count(connected_components(result.graph))});
  }
  result.graph.set_global_distortion(current);
  return result;
}

// ---------------------------------------------------------------------------
// Connectivity-based pruning

enum class PathQualityMode {
  /// 1 / (sum of edge weights): the best path is the shortest path.
  reciprocal_length,
  /// sum of 1 / (edge weight) over the path's edges.
  inverse_sum,
};

/// Quality of a path given as consecutive edges of the graph.
inline double path_quality(const ClusterGraphModel& graph, std::span<const EdgeKey> path,
                           PathQualityMode mode = PathQualityMode::reciprocal_length) {
  if (path.empty()) throw config_error("path quality of an empty path");
  double length = 0.0;
  double inverse_sum = 0.0;
  for (std::size_t t = 0; t < path.size(); ++t) {
    const Edge& e = graph.edge(path[t].first, path[t].second);
    if (!(e.weight > 0.0)) throw input_error("path quality is undefined for a zero-weight edge");
    if (t > 0) {
      const EdgeKey a = path[t - 1];
      const EdgeKey b = path[t];
      const bool touches = a.first == b.first || a.first == b.second || a.second == b.first || a.second == b.second;
      if (!touches) throw config_error("path edges are not consecutive");
    }
    length += e.weight;
    inverse_sum += 1.0 / e.weight;
  }
  return mode == PathQualityMode::reciprocal_length ? 1.0 / length : inverse_sum;
}

/// Best path quality between i and j; -infinity when they are disconnected.
inline double connectivity(const ClusterGraphModel& graph, VertexId i, VertexId j) {
  if (i == j) throw config_error("connectivity needs two distinct vertices");
  for (const auto& [key, e] : graph.edges()) {
    if (!(e.weight > 0.0)) throw input_error("connectivity is undefined with zero-weight edges");
  }
  const double d = (*graph.shortest_paths())(i, j);
  return std::isfinite(d) ? 1.0 / d : -std::numeric_limits<double>::infinity();
}

namespace detail {

/// Mean of 1 / d over the vertex pairs that share a group.
inline double mean_connectivity(const DistanceMatrix& paths, const std::vector<int>& group) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (VertexId a = 0; a < group.size(); ++a) {
    for (VertexId b = a + 1; b < group.size(); ++b) {
      if (group[a] != group[b]) continue;
      const double d = paths(a, b);
      if (!std::isfinite(d)) return -std::numeric_limits<double>::infinity();
      sum += 1.0 / d;
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

}  // namespace detail

/// Average connectivity over all vertex pairs of a connected graph.
inline double graph_connectivity(const ClusterGraphModel& graph) {
  if (graph.vertex_count() < 2) throw config_error("graph connectivity needs at least two vertices");
  const auto connected = connected_components(graph);
  if (component_count(connected) != 1) {
    throw input_error("graph connectivity needs a connected graph; analyze each component separately");
  }
  for (const auto& [key, e] : graph.edges()) {
    if (!(e.weight > 0.0)) throw input_error("connectivity is undefined with zero-weight edges");
  }
  return detail::mean_connectivity(*graph.shortest_paths(), connected);
}

struct ConnectivityStop {
  /// Maximum number of removals.
  std::optional<std::size_t> budget;
  /// Stop before connectivity kept (relative to the original edges) would fall below this.
  std::optional<double> floor;
};

/// Greedily removes the removable edge that keeps the most connectivity, never removing
/// a bridge. On a graph with several components the connectivity is averaged over
/// pairs inside each component. `removable` defaults to every edge.
inline PruneResult connectivity_prune(const ClusterGraphModel& graph,
                                      const std::optional<std::set<EdgeKey>>& removable, ConnectivityStop stop,
                                      Parallelism parallelism = {}) {
  for (const auto& [key, e] : graph.edges()) {
    if (!(e.weight > 0.0)) throw input_error("connectivity pruning is undefined with zero-weight edges");
  }
  std::set<EdgeKey> allowed;
  for (const auto& [key, e] : graph.edges()) {
    if (!removable || removable->count(key)) allowed.insert(key);
  }
  if (allowed.empty()) throw config_error("connectivity pruning was given an empty removable edge set");

  PruneResult result{graph, {}};
  result.trace.strategy = "connectivity";
  const auto groups = connected_components(graph);
  DistanceMatrix paths = *graph.shortest_paths();
  const double original = detail::mean_connectivity(paths, groups);
  double current = original;
  result.trace.initial_value = original;

  for (;;) {
    if (stop.budget && result.trace.steps.size() >= *stop.budget) {
      result.trace.stop = StopReason::step_budget;
      break;
    }
    const auto bridge_set = bridges(result.graph);
    std::vector<EdgeKey> candidates;
    for (const EdgeKey& key : allowed) {
      if (result.graph.edges().count(key) && !bridge_set.count(key)) candidates.push_back(key);
    }
    if (candidates.empty()) {
      result.trace.stop = StopReason::connectivity_floor;
      break;
    }
    const auto connected = connected_components(result.graph);
    std::vector<double> after(candidates.size());
    parallel_for(candidates.size(), parallelism, [&](std::size_t t) {
      after[t] =
          detail::mean_connectivity(detail::paths_without(result.graph, paths, connected, candidates[t]), groups);
    });
    std::size_t best = 0;
    for (std::size_t t = 1; t < candidates.size(); ++t) {
      if (after[t] > after[best]) best = t;
    }
    const double kept = original > 0.0 ? after[best] / original : 1.0;
    if (stop.floor && kept < *stop.floor) {
      result.trace.stop = StopReason::threshold_reached;
      break;
    }
    const EdgeKey chosen = candidates[best];
    const double step = current > 0.0 ? after[best] / current : 1.0;
    paths = detail::paths_without(result.graph, paths, connected, chosen);
    result.graph.remove_edge(chosen.first, chosen.second);
    current = after[best];
    result.trace.steps.push_back(PruneStep{chosen, kept, step, component_count(connected_components(result.graph))});
  }
  return result;
}

// ---------------------------------------------------------------------------
// Merging

struct MergeResult {
  ClusterGraphModel graph;
  std::vector<EdgeKey> added;
  /// False when the graph already had a single component (nothing to merge).
  bool performed = false;
};

/// Links every vertex to its k_merge nearest vertices (by the inter-cluster metric)
/// outside its connected component, with merge-provenance edges.
inline MergeResult merge_components(const ClusterGraphModel& graph, const PointCloud& cloud,
                                    const ClusterMetricChoice& metric, std::size_t k_merge,
                                    Parallelism parallelism = {}) {
  if (k_merge == 0) throw config_error("k_merge must be positive");
  MergeResult result{graph, {}, false};
  const auto connected = connected_components(graph);
  if (component_count(connected) < 2) return result;
  result.performed = true;

  const std::size_t n = graph.vertex_count();
  std::vector<EdgeKey> cross;
  for (VertexId a = 0; a < n; ++a) {
    for (VertexId b = a + 1; b < n; ++b) {
      if (connected[a] != connected[b]) cross.emplace_back(a, b);
    }
  }
  std::vector<double> d(cross.size());
  parallel_for(cross.size(), parallelism, [&](std::size_t t) {
    d[t] = cluster_distance(cloud, graph.vertex(cross[t].first).members, graph.vertex(cross[t].second).members,
                            metric);
  });
  DistanceMatrix between(n, kInfinity);
  for (std::size_t t = 0; t < cross.size(); ++t) {
    between(cross[t].first, cross[t].second) = d[t];
    between(cross[t].second, cross[t].first) = d[t];
  }

  for (VertexId v = 0; v < n; ++v) {
    std::vector<std::pair<double, VertexId>> options;
    for (VertexId u = 0; u < n; ++u) {
      if (connected[u] != connected[v]) options.emplace_back(between(v, u), u);
    }
    const std::size_t take = std::min(k_merge, options.size());
    std::partial_sort(options.begin(), options.begin() + static_cast<std::ptrdiff_t>(take), options.end());
    for (std::size_t t = 0; t < take; ++t) {
      const VertexId u = options[t].second;
      if (result.graph.has_edge(v, u)) continue;
      result.graph.add_edge(v, u, Edge{options[t].first, std::nullopt, Provenance::merge});
      result.added.push_back(make_edge_key(v, u));
    }
  }
  return result;
}

/// Edges of the given provenance.
inline std::set<EdgeKey> edges_with(const ClusterGraphModel& graph, Provenance provenance) {
  std::set<EdgeKey> out;
  for (const auto& [key, e] : graph.edges()) {
    if (e.provenance == provenance) out.insert(key);
  }
  return out;
}

}  // namespace clustergraph
