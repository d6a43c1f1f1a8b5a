#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "clustergraph/clustering.hpp"
#include "clustergraph/error.hpp"
#include "clustergraph/point_cloud.hpp"
#include "clustergraph/random.hpp"

namespace clustergraph {

struct KMeansResult {
  Clustering clustering;
  /// Cluster index (in clustering order) of every point.
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
  bool converged = false;
  /// Within-cluster sum of squares after every assignment step.
  std::vector<double> wcss_history;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) acc += (a[t] - b[t]) * (a[t] - b[t]);
  return acc;
}

inline std::string padded(std::size_t value, std::size_t count) {
  std::size_t width = 1;
  for (std::size_t top = count > 0 ? count - 1 : 0; top >= 10; top /= 10) ++width;
  std::string digits = std::to_string(value);
  return std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeding (D^2 sampling). Converges when no point
/// changes cluster, or after `max_iterations`. A cluster left empty by an update is
/// reseeded at the point farthest from its centroid. Clusters are named c0, c1, ...
/// (zero-padded) in order of their smallest member.
inline KMeansResult kmeans_detailed(const PointCloud& cloud, std::size_t k, std::uint64_t seed,
                                    std::size_t max_iterations = 300) {
  if (cloud.mode() != PointCloud::Mode::coordinates) {
    throw config_error("k-means needs coordinates; the point cloud is a distance matrix");
  }
  const std::size_t n = cloud.size();
  const std::size_t dim = cloud.dimension();
  if (k < 1 || k > n) {
    throw config_error("k-means k = " + std::to_string(k) + " must satisfy 1 <= k <= N = " + std::to_string(n));
  }
  auto point = [&](std::size_t i) { return cloud.coordinates(i); };

  Rng rng(seed);
  std::vector<double> centroids;
  centroids.reserve(k * dim);
  auto centroid = [&](std::size_t c) { return std::span<const double>(centroids.data() + c * dim, dim); };
  auto set_centroid = [&](std::size_t c, std::span<const double> value) {
    std::copy(value.begin(), value.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
  };

  std::vector<bool> chosen(n, false);
  std::size_t first = rng.below(n);
  chosen[first] = true;
  centroids.insert(centroids.end(), point(first).begin(), point(first).end());
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = detail::squared_distance(point(i), point(first));
  while (centroids.size() < k * dim) {
    double total = 0.0;
    for (double v : nearest) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        running += nearest[i];
        if (nearest[i] > 0.0 && running > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (nearest[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) free.push_back(i);
      }
      pick = free[rng.below(free.size())];
    }
    chosen[pick] = true;
    centroids.insert(centroids.end(), point(pick).begin(), point(pick).end());
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], detail::squared_distance(point(i), point(pick)));
    }
  }

  KMeansResult result;
  std::vector<std::size_t> assignment(n, k);
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    std::size_t changed = 0;
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = detail::squared_distance(point(i), centroid(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double d = detail::squared_distance(point(i), centroid(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[i] != best) ++changed;
      assignment[i] = best;
      wcss += best_d;
    }
    result.wcss_history.push_back(wcss);
    result.iterations = iter + 1;
    if (changed == 0) {
      result.converged = true;
      break;
    }

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = point(i);
      for (std::size_t t = 0; t < dim; ++t) sums[assignment[i] * dim + t] += p[t];
      ++counts[assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t t = 0; t < dim; ++t) centroids[c * dim + t] = sums[c * dim + t] / static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assignment[i]] < 2) continue;
        const double d = detail::squared_distance(point(i), centroid(assignment[i]));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) break;
      --counts[assignment[far]];
      assignment[far] = c;
      counts[c] = 1;
      set_centroid(c, point(far));
    }
  }

  // Duplicate points can leave a centroid without members; hand it the farthest point
  // of a cluster that can spare one.
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t a : assignment) ++sizes[a];
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    std::size_t far = n;
    double far_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sizes[assignment[i]] < 2) continue;
      const double d = detail::squared_distance(point(i), centroid(assignment[i]));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    --sizes[assignment[far]];
    assignment[far] = c;
    sizes[c] = 1;
  }

  std::vector<std::vector<PointId>> groups(k);
  for (std::size_t i = 0; i < n; ++i) groups[assignment[i]].push_back(i);
  std::vector<std::size_t> order(k);
  for (std::size_t c = 0; c < k; ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return groups[a].front() < groups[b].front(); });
  std::map<std::string, std::vector<PointId>> named;
  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < k; ++r) {
    rank[order[r]] = r;
    named.emplace("c" + detail::padded(r, k), groups[order[r]]);
  }
  result.clustering = Clustering(named, Clustering::Kind::partition);
  result.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.assignment[i] = rank[assignment[i]];
  return result;
}

inline Clustering kmeans(const PointCloud& cloud, std::size_t k, std::uint64_t seed) {
  return kmeans_detailed(cloud, k, seed).clustering;
}

/// Runs k-means inside every class separately. Cluster ids are "<class>/<index>".
/// `labels` must name a class for every point.
inline Clustering per_label_clustering(const PointCloud& cloud, std::span<const std::string> labels,
                                       std::size_t k_per_class, std::uint64_t seed) {
  if (cloud.mode() != PointCloud::Mode::coordinates) {
    throw config_error("per-label clustering needs coordinates; the point cloud is a distance matrix");
  }
  if (labels.size() != cloud.size()) throw input_error("per-label clustering needs one label per point");
  std::map<std::string, std::vector<PointId>> classes;
  for (PointId p = 0; p < labels.size(); ++p) {
    if (labels[p].empty()) throw input_error("point " + std::to_string(p) + " has no class label");
    classes[labels[p]].push_back(p);
  }
  std::map<std::string, std::vector<PointId>> out;
  std::uint64_t stream = 0;
  for (const auto& [label, points] : classes) {
    if (points.size() < k_per_class) {
      throw input_error("class '" + label + "' has " + std::to_string(points.size()) + " points, fewer than " +
                        std::to_string(k_per_class));
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(points.size());
    for (PointId p : points) {
      const auto c = cloud.coordinates(p);
      rows.emplace_back(c.begin(), c.end());
    }
    const PointCloud sub = PointCloud::from_coordinates(rows);
    const KMeansResult local = kmeans_detailed(sub, k_per_class, mix_seed(seed, stream++));
    for (std::size_t c = 0; c < local.clustering.size(); ++c) {
      std::vector<PointId> members;
      for (PointId local_id : local.clustering.members(c)) members.push_back(points[local_id]);
      out.emplace(label + "/" + detail::padded(c, k_per_class), std::move(members));
    }
  }
  return Clustering(out, Clustering::Kind::partition);
}

}  // namespace clustergraph
