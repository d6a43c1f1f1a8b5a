#pragma once

// Synthetic datasets shared by the unit tests and the acceptance suite.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "clustergraph/clustergraph.hpp"

namespace fixtures {

using clustergraph::PointCloud;
using clustergraph::Rng;

// Two concentric rings, `per_ring` points each, angles drawn uniformly at random.
inline PointCloud circles(std::size_t per_ring = 250, double inner = 1.0, double outer = 2.0,
                          std::uint64_t seed = 7) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (double radius : {inner, outer}) {
    for (std::size_t i = 0; i < per_ring; ++i) {
      const double t = 2.0 * std::numbers::pi * rng.uniform();
      rows.push_back({radius * std::cos(t), radius * std::sin(t)});
      labels.push_back(radius == inner ? "inner" : "outer");
    }
  }
  return PointCloud::from_coordinates(rows, labels);
}

inline std::vector<std::vector<double>> uniform_rows(std::size_t n, std::size_t dim, std::uint64_t seed,
                                                     double scale = 1.0) {
  Rng rng(seed);
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (auto& row : rows) {
    for (double& v : row) v = scale * rng.uniform();
  }
  return rows;
}

inline PointCloud uniform_cloud(std::size_t n, std::size_t dim, std::uint64_t seed, double scale = 1.0) {
  return PointCloud::from_coordinates(uniform_rows(n, dim, seed, scale));
}

// Four clusters of five points: points in one cluster coincide, cluster 0 is at
// distance 1 from every other cluster, and the others are at distance 2 apart.
inline std::vector<std::vector<double>> four_cluster_matrix() {
  const std::size_t n = 20;
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = i / 5, b = j / 5;
      if (a == b) continue;
      m[i][j] = (a == 0 || b == 0) ? 1.0 : 2.0;
    }
  }
  return m;
}

inline clustergraph::Clustering four_cluster_partition() {
  std::map<std::string, std::vector<clustergraph::PointId>> clusters;
  for (std::size_t i = 0; i < 20; ++i) clusters["C" + std::to_string(i / 5)].push_back(i);
  return clustergraph::Clustering(clusters, clustergraph::Clustering::Kind::partition);
}

// Cluster a cloud into consecutive index blocks of (roughly) equal size.
inline clustergraph::Clustering blocks(std::size_t n, std::size_t count) {
  std::map<std::string, std::vector<clustergraph::PointId>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters["b" + std::to_string(i * count / n)].push_back(i);
  return clustergraph::Clustering(clusters, clustergraph::Clustering::Kind::partition);
}

}  // namespace fixtures
