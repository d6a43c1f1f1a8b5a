#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clustergraph/clustering.hpp"
#include "clustergraph/error.hpp"
#include "clustergraph/graph_build.hpp"
#include "clustergraph/metrics.hpp"
#include "clustergraph/model.hpp"
#include "clustergraph/parallel.hpp"
#include "clustergraph/point_cloud.hpp"

namespace clustergraph {

/// Union of the clusters of `other` that intersect `cluster`.
inline std::vector<PointId> image_of_cluster(std::span<const PointId> cluster, const Clustering& other) {
  if (cluster.empty()) throw config_error("image of an empty cluster");
  std::vector<PointId> image;
  std::vector<bool> hit(other.size(), false);
  for (PointId p : cluster) {
    bool found = false;
    for (std::size_t c = 0; c < other.size(); ++c) {
      const auto members = other.members(c);
      if (std::binary_search(members.begin(), members.end(), p)) {
        hit[c] = true;
        found = true;
      }
    }
    if (!found) throw input_error("point " + std::to_string(p) + " is not covered by the second clustering");
  }
  for (std::size_t c = 0; c < other.size(); ++c) {
    if (!hit[c]) continue;
    const auto members = other.members(c);
    image.insert(image.end(), members.begin(), members.end());
  }
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end()), image.end());
  return image;
}

/// Largest pairwise distance in the set; 0 for singletons.
inline double set_diameter(const PointCloud& cloud, std::span<const PointId> points) {
  if (points.empty()) throw config_error("diameter of an empty set");
  double best = 0.0;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) best = std::max(best, cloud.distance(points[a], points[b]));
  }
  return best;
}

struct VertexImage {
  std::vector<VertexId> vertices;
  /// Largest edge weight among the image vertices.
  double diameter = 0.0;
};

/// Vertices of `other_graph` whose clusters contain points of `cluster`, and the
/// diameter of the clique they span. The image must be a clique of `other_graph`.
inline VertexImage image_of_vertex(std::span<const PointId> cluster, const ClusterGraphModel& other_graph) {
  if (cluster.empty()) throw config_error("image of an empty vertex");
  VertexImage out;
  for (VertexId v = 0; v < other_graph.vertex_count(); ++v) {
    const auto& members = other_graph.vertex(v).members;
    const bool meets = std::any_of(cluster.begin(), cluster.end(), [&](PointId p) {
      return std::binary_search(members.begin(), members.end(), p);
    });
    if (meets) out.vertices.push_back(v);
  }
  if (out.vertices.empty()) throw input_error("vertex image is empty: the graphs cover different points");
  for (std::size_t a = 0; a < out.vertices.size(); ++a) {
    for (std::size_t b = a + 1; b < out.vertices.size(); ++b) {
      if (!other_graph.has_edge(out.vertices[a], out.vertices[b])) {
        throw config_error("vertex image is not a clique; image diameters need an unpruned complete graph");
      }
      out.diameter = std::max(out.diameter, other_graph.edge(out.vertices[a], out.vertices[b]).weight);
    }
  }
  return out;
}

struct StabilityReport {
  double delta = 0.0;
  bool delta_auto = false;
  std::size_t clusters_checked = 0;
  /// max over C-clusters of diam(image) / delta; the bound is 3.
  double worst_image_ratio = 0.0;
  /// max over C-vertices of clique diameter / delta, per metric; bounds are 3 (max, avg) and 1 (min).
  std::map<std::string, double> worst_clique_ratio;
  std::size_t violations = 0;
};

/// Verifies the image-diameter bounds between two clusterings whose clusters all have
/// diameter at most delta (computed as the largest cluster diameter when not given).
inline StabilityReport check_stability(const PointCloud& cloud, const Clustering& first, const Clustering& second,
                                       std::optional<double> delta = std::nullopt, Parallelism parallelism = {}) {
  validate(cloud, first);
  validate(cloud, second);
  std::vector<double> diam_first(first.size()), diam_second(second.size());
  parallel_for(first.size(), parallelism, [&](std::size_t c) { diam_first[c] = set_diameter(cloud, first.members(c)); });
  parallel_for(second.size(), parallelism,
               [&](std::size_t c) { diam_second[c] = set_diameter(cloud, second.members(c)); });
  double largest = 0.0;
  for (double d : diam_first) largest = std::max(largest, d);
  for (double d : diam_second) largest = std::max(largest, d);

  StabilityReport report;
  report.delta_auto = !delta.has_value();
  report.delta = delta.value_or(largest);
  if (largest > report.delta) {
    throw input_error("a cluster has diameter " + std::to_string(largest) + " > delta = " +
                      std::to_string(report.delta));
  }
  report.clusters_checked = first.size();

  auto ratio = [&](double value) {
    if (report.delta > 0.0) return value / report.delta;
    return value > 0.0 ? kInfinity : 0.0;
  };
  // A tiny relative slack absorbs rounding in the averaged distances.
  constexpr double slack = 1e-12;
  auto exceeds = [&](double value, double bound) { return value > bound * report.delta * (1.0 + slack) + slack; };

  std::vector<double> image_diam(first.size());
  parallel_for(first.size(), parallelism, [&](std::size_t c) {
    const auto image = image_of_cluster(first.members(c), second);
    image_diam[c] = set_diameter(cloud, image);
  });
  for (double d : image_diam) {
    report.worst_image_ratio = std::max(report.worst_image_ratio, ratio(d));
    if (exceeds(d, 3.0)) ++report.violations;
  }

  const std::vector<std::pair<ClusterMetricKind, double>> bounds = {
      {ClusterMetricKind::min, 1.0}, {ClusterMetricKind::max, 3.0}, {ClusterMetricKind::avg, 3.0}};
  for (const auto& [kind, bound] : bounds) {
    const ClusterMetricChoice metric{kind, 1.0};
    const ClusterGraphModel other = build_complete_cluster_graph(cloud, second, metric, parallelism);
    double worst = 0.0;
    for (std::size_t c = 0; c < first.size(); ++c) {
      const VertexImage image = image_of_vertex(first.members(c), other);
      worst = std::max(worst, ratio(image.diameter));
      if (exceeds(image.diameter, bound)) ++report.violations;
    }
    report.worst_clique_ratio[metric.tag()] = worst;
  }
  return report;
}

}  // namespace clustergraph
