#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clustergraph/clustering.hpp"
#include "clustergraph/geodesics.hpp"
#include "clustergraph/metrics.hpp"
#include "clustergraph/model.hpp"
#include "clustergraph/parallel.hpp"
#include "clustergraph/point_cloud.hpp"

namespace clustergraph {

namespace detail {

inline std::map<std::string, double> composition_of(const PointCloud& cloud, std::span<const PointId> members) {
  std::map<std::string, double> counts;
  for (PointId p : members) counts[std::string(cloud.label(p))] += 1.0;
  for (auto& [label, value] : counts) value /= static_cast<double>(members.size());
  return counts;
}

inline ClusterGraphModel assemble(const PointCloud& cloud, const Clustering& clustering,
                                  const std::vector<int>& vertex_component, const ClusterMetricChoice& metric,
                                  std::size_t knn_k, Parallelism parallelism) {
  metric.validate();
  std::vector<Vertex> vertices;
  vertices.reserve(clustering.size());
  for (std::size_t c = 0; c < clustering.size(); ++c) {
    const auto members = clustering.members(c);
    vertices.push_back(Vertex{clustering.id(c), std::vector<PointId>(members.begin(), members.end()),
                              composition_of(cloud, members), vertex_component[c]});
  }
  ClusterGraphModel graph(std::move(vertices), metric.tag(), knn_k);

  std::vector<EdgeKey> pairs;
  for (VertexId a = 0; a < clustering.size(); ++a) {
    for (VertexId b = a + 1; b < clustering.size(); ++b) {
      if (vertex_component[a] == vertex_component[b]) pairs.emplace_back(a, b);
    }
  }
  std::vector<double> weights(pairs.size());
  parallel_for(pairs.size(), parallelism, [&](std::size_t t) {
    weights[t] = cluster_distance(cloud, clustering.members(pairs[t].first), clustering.members(pairs[t].second),
                                  metric);
  });
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    graph.add_edge(pairs[t].first, pairs[t].second, Edge{weights[t], std::nullopt, Provenance::original});
  }
  return graph;
}

}  // namespace detail

/// One vertex per cluster, and a complete graph inside every geodesic component with
/// edges weighted by the chosen inter-cluster distance. A cluster whose points fall in
/// more than one k-nn component is rejected.
inline ClusterGraphModel build_cluster_graph(const PointCloud& cloud, const Clustering& clustering,
                                             const GeodesicIndex& index, const ClusterMetricChoice& metric,
                                             Parallelism parallelism = {}) {
  validate(cloud, clustering);
  if (index.size() != cloud.size()) throw input_error("geodesic index and point cloud sizes differ");
  std::vector<int> vertex_component(clustering.size());
  for (std::size_t c = 0; c < clustering.size(); ++c) {
    const auto members = clustering.members(c);
    const int first = index.component(members.front());
    for (PointId p : members) {
      if (index.component(p) != first) {
        throw input_error("cluster '" + clustering.id(c) + "' straddles k-nn components " +
                          std::to_string(first) + " and " + std::to_string(index.component(p)) +
                          " (point " + std::to_string(p) + ")");
      }
    }
    vertex_component[c] = first;
  }
  return detail::assemble(cloud, clustering, vertex_component, metric, index.k(), parallelism);
}

/// Complete graph over all clusters, ignoring geodesic structure (every vertex in
/// component 0). Used for stability diagnostics.
inline ClusterGraphModel build_complete_cluster_graph(const PointCloud& cloud, const Clustering& clustering,
                                                      const ClusterMetricChoice& metric,
                                                      Parallelism parallelism = {}) {
  validate(cloud, clustering);
  return detail::assemble(cloud, clustering, std::vector<int>(clustering.size(), 0), metric, 0, parallelism);
}

/// Maps each point to the graph vertices whose clusters contain it.
inline std::vector<std::vector<VertexId>> point_vertices(const ClusterGraphModel& graph, std::size_t point_count) {
  std::vector<std::vector<VertexId>> out(point_count);
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    for (PointId p : graph.vertex(v).members) {
      if (p >= point_count) throw input_error("vertex '" + graph.vertex(v).id + "' has out-of-range point");
      out[p].push_back(v);
    }
  }
  return out;
}

/// d_CG(x, y): shortest-path length in the graph between the vertices holding x and y,
/// minimized over all such vertices for divisions. 0 when one cluster holds both;
/// infinity when no path exists.
inline double cluster_graph_distance(const ClusterGraphModel& graph, const Clustering& clustering, PointId x,
                                     PointId y) {
  auto vertices_of = [&](PointId p) {
    std::vector<VertexId> out;
    for (std::size_t c = 0; c < clustering.size(); ++c) {
      const auto members = clustering.members(c);
      if (std::binary_search(members.begin(), members.end(), p)) {
        auto v = graph.index_of(clustering.id(c));
        if (!v) throw input_error("cluster '" + clustering.id(c) + "' has no vertex in the graph");
        out.push_back(*v);
      }
    }
    if (out.empty()) throw input_error("point " + std::to_string(p) + " is not clustered");
    return out;
  };
  const auto xs = vertices_of(x);
  const auto ys = vertices_of(y);
  const auto paths = graph.shortest_paths();
  double best = kInfinity;
  for (VertexId a : xs) {
    for (VertexId b : ys) best = std::min(best, (*paths)(a, b));
  }
  return best;
}

}  // namespace clustergraph
