#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <queue>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clustergraph/error.hpp"
#include "clustergraph/point_cloud.hpp"

namespace clustergraph {

struct Neighbor {
  PointId id;
  double weight;
};

/// k-nearest-neighbor graph over a point cloud (union-symmetrized, edge weight = d_X),
/// its connected components, and the shortest-path estimator d_X^k of intrinsic distance.
/// Single-source shortest paths are computed lazily and cached per source; queries are
/// safe from concurrent threads.
class GeodesicIndex {
 public:
  /// Each point picks its k nearest other points, ties broken by ascending id.
  static GeodesicIndex build(const PointCloud& cloud, std::size_t k) {
    const std::size_t n = cloud.size();
    if (k < 1 || k >= n) {
      throw config_error("k-nn parameter k = " + std::to_string(k) + " must satisfy 1 <= k < N = " +
                         std::to_string(n));
    }
    GeodesicIndex index;
    index.k_ = k;
    index.chosen_.assign(n, {});
    index.adjacency_.assign(n, {});

    std::vector<std::pair<double, PointId>> candidates;
    candidates.reserve(n);
    for (PointId x = 0; x < n; ++x) {
      candidates.clear();
      for (PointId y = 0; y < n; ++y) {
        if (y != x) candidates.emplace_back(cloud.distance(x, y), y);
      }
      std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                        candidates.end());
      for (std::size_t t = 0; t < k; ++t) {
        const auto [d, y] = candidates[t];
        index.chosen_[x].push_back(y);
        index.adjacency_[x].push_back({y, d});
        index.adjacency_[y].push_back({x, d});
      }
    }
    for (auto& list : index.adjacency_) {
      std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
      list.erase(std::unique(list.begin(), list.end(),
                             [](const Neighbor& a, const Neighbor& b) { return a.id == b.id; }),
                 list.end());
    }
    index.label_components();
    return index;
  }

  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return adjacency_.size(); }
  std::span<const Neighbor> neighbors(PointId x) const { return adjacency_.at(x); }
  /// The k neighbors x selected before symmetrization.
  std::span<const PointId> chosen_neighbors(PointId x) const { return chosen_.at(x); }

  int component(PointId x) const { return component_.at(x); }
  const std::vector<int>& point_components() const noexcept { return component_; }
  std::size_t component_count() const noexcept { return members_.size(); }
  /// Points of each component, ascending; component c is listed at position c.
  const std::vector<std::vector<PointId>>& component_members() const noexcept { return members_; }

  /// d_X^k(x, y); infinity when x and y lie in different components.
  double distance(PointId x, PointId y) const {
    check(x);
    check(y);
    if (x == y) return 0.0;
    if (component_[x] != component_[y]) return std::numeric_limits<double>::infinity();
    return (*distances_from(x))[y];
  }

  /// All d_X^k(source, .) values, cached.
  std::shared_ptr<const std::vector<double>> distances_from(PointId source) const {
    check(source);
    {
      std::lock_guard lock(cache_->mutex);
      auto it = cache_->rows.find(source);
      if (it != cache_->rows.end()) return it->second;
    }
    auto row = std::make_shared<const std::vector<double>>(dijkstra(source));
    std::lock_guard lock(cache_->mutex);
    return cache_->rows.emplace(source, std::move(row)).first->second;
  }

 private:
  struct Cache {
    std::mutex mutex;
    std::unordered_map<PointId, std::shared_ptr<const std::vector<double>>> rows;
  };

  GeodesicIndex() : cache_(std::make_shared<Cache>()) {}

  void check(PointId x) const {
    if (x >= adjacency_.size()) {
      throw input_error("point id " + std::to_string(x) + " out of range (N = " +
                        std::to_string(adjacency_.size()) + ")");
    }
  }

  void label_components() {
    const std::size_t n = adjacency_.size();
    component_.assign(n, -1);
    members_.clear();
    std::vector<PointId> stack;
    for (PointId s = 0; s < n; ++s) {
      if (component_[s] != -1) continue;
      const int label = static_cast<int>(members_.size());
      members_.emplace_back();
      component_[s] = label;
      stack.push_back(s);
      while (!stack.empty()) {
        const PointId v = stack.back();
        stack.pop_back();
        members_.back().push_back(v);
        for (const Neighbor& nb : adjacency_[v]) {
          if (component_[nb.id] == -1) {
            component_[nb.id] = label;
            stack.push_back(nb.id);
          }
        }
      }
      std::sort(members_.back().begin(), members_.back().end());
    }
  }

  std::vector<double> dijkstra(PointId source) const {
    std::vector<double> dist(adjacency_.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, PointId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
      const auto [d, v] = queue.top();
      queue.pop();
      if (d > dist[v]) continue;
      for (const Neighbor& nb : adjacency_[v]) {
        const double candidate = d + nb.weight;
        if (candidate < dist[nb.id]) {
          dist[nb.id] = candidate;
          queue.emplace(candidate, nb.id);
        }
      }
    }
    return dist;
  }

  std::size_t k_ = 0;
  std::vector<std::vector<PointId>> chosen_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<int> component_;
  std::vector<std::vector<PointId>> members_;
  std::shared_ptr<Cache> cache_;
};

inline GeodesicIndex build_knn_graph(const PointCloud& cloud, std::size_t k) {
  return GeodesicIndex::build(cloud, k);
}

inline double geodesic_distance(const GeodesicIndex& index, PointId x, PointId y) {
  return index.distance(x, y);
}

}  // namespace clustergraph
