#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clustergraph/clustering.hpp"
#include "clustergraph/error.hpp"

namespace clustergraph {

using VertexId = std::size_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Unordered vertex pair stored as (smaller, larger).
using EdgeKey = std::pair<VertexId, VertexId>;

inline EdgeKey make_edge_key(VertexId a, VertexId b) {
  if (a == b) throw internal_error("self-loop on vertex " + std::to_string(a));
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

/// Dense square matrix of doubles.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n, double fill) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

enum class Provenance { original, merge };

inline std::string_view to_string(Provenance p) { return p == Provenance::original ? "original" : "merge"; }

struct Edge {
  double weight = 0.0;
  std::optional<double> distortion;
  Provenance provenance = Provenance::original;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Vertex {
  std::string id;
  std::vector<PointId> members;
  std::map<std::string, double> composition;
  /// Geodesic component of the vertex's points.
  int component = 0;

  std::size_t size() const noexcept { return members.size(); }

  friend bool operator==(const Vertex&, const Vertex&) = default;
};

namespace detail {

/// Memo slot for the all-pairs shortest-path matrix. Copies start empty.
class PathMemo {
 public:
  PathMemo() = default;
  PathMemo(const PathMemo&) {}
  PathMemo& operator=(const PathMemo&) {
    reset();
    return *this;
  }

  template <typename Compute>
  std::shared_ptr<const DistanceMatrix> get(Compute&& compute) const {
    std::lock_guard lock(mutex_);
    if (!value_) value_ = std::make_shared<const DistanceMatrix>(compute());
    return value_;
  }

  void reset() {
    std::lock_guard lock(mutex_);
    value_.reset();
  }

 private:
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const DistanceMatrix> value_;
};

}  // namespace detail

/// Floyd-Warshall over a weight matrix (kInfinity = no edge, zero diagonal).
inline DistanceMatrix floyd_warshall(DistanceMatrix dist) {
  const std::size_t n = dist.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double dik = dist(i, k);
      if (dik == kInfinity) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double candidate = dik + dist(k, j);
        if (candidate < dist(i, j)) dist(i, j) = candidate;
      }
    }
  }
  return dist;
}

/// Weighted graph on clusters. Vertices are ordered by cluster id; edges are keyed by
/// (smaller, larger) vertex index. Mutators return nothing and invalidate the memoized
/// shortest paths; pruning code works on copies.
class ClusterGraphModel {
 public:
  ClusterGraphModel() = default;

  ClusterGraphModel(std::vector<Vertex> vertices, std::string metric_tag, std::size_t knn_k)
      : vertices_(std::move(vertices)), metric_tag_(std::move(metric_tag)), knn_k_(knn_k) {
    for (std::size_t v = 1; v < vertices_.size(); ++v) {
      if (!(vertices_[v - 1].id < vertices_[v].id)) {
        throw internal_error("vertex ids must be unique and sorted ('" + vertices_[v - 1].id +
                             "', '" + vertices_[v].id + "')");
      }
    }
  }

  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
  const Vertex& vertex(VertexId v) const { return vertices_.at(v); }
  const std::map<EdgeKey, Edge>& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::string& metric_tag() const noexcept { return metric_tag_; }
  std::size_t knn_k() const noexcept { return knn_k_; }
  std::optional<double> global_distortion() const noexcept { return global_distortion_; }
  void set_global_distortion(std::optional<double> value) { global_distortion_ = value; }

  std::optional<VertexId> index_of(std::string_view id) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), id,
                               [](const Vertex& v, std::string_view key) { return v.id < key; });
    if (it == vertices_.end() || it->id != id) return std::nullopt;
    return static_cast<VertexId>(it - vertices_.begin());
  }

  bool has_edge(VertexId a, VertexId b) const { return a != b && edges_.count(make_edge_key(a, b)) > 0; }

  const Edge& edge(VertexId a, VertexId b) const {
    auto it = edges_.find(make_edge_key(a, b));
    if (it == edges_.end()) {
      throw internal_error("no edge between '" + vertex(a).id + "' and '" + vertex(b).id + "'");
    }
    return it->second;
  }

  /// Adds an edge, enforcing the model invariants.
  void add_edge(VertexId a, VertexId b, Edge e) {
    const EdgeKey key = make_edge_key(a, b);
    if (key.second >= vertices_.size()) throw internal_error("edge endpoint out of range");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw internal_error("edge weight must be finite and >= 0 ('" + vertices_[a].id + "', '" +
                           vertices_[b].id + "')");
    }
    if (e.provenance == Provenance::original &&
        vertices_[key.first].component != vertices_[key.second].component) {
      throw internal_error("original edge joins different geodesic components");
    }
    if (!edges_.emplace(key, e).second) throw internal_error("duplicate edge");
    memo_.reset();
  }

  void remove_edge(VertexId a, VertexId b) {
    if (edges_.erase(make_edge_key(a, b)) == 0) throw internal_error("removing a missing edge");
    memo_.reset();
  }

  void set_distortion(VertexId a, VertexId b, std::optional<double> value) {
    auto it = edges_.find(make_edge_key(a, b));
    if (it == edges_.end()) throw internal_error("annotating a missing edge");
    it->second.distortion = value;
  }

  /// Edge weights as a dense matrix; kInfinity where there is no edge.
  DistanceMatrix weight_matrix() const {
    DistanceMatrix w(vertices_.size(), kInfinity);
    for (std::size_t v = 0; v < vertices_.size(); ++v) w(v, v) = 0.0;
    for (const auto& [key, e] : edges_) {
      w(key.first, key.second) = e.weight;
      w(key.second, key.first) = e.weight;
    }
    return w;
  }

  /// Memoized all-pairs shortest paths over the current edge set.
  std::shared_ptr<const DistanceMatrix> shortest_paths() const {
    return memo_.get([this] { return floyd_warshall(weight_matrix()); });
  }

  std::vector<std::vector<VertexId>> adjacency() const {
    std::vector<std::vector<VertexId>> adj(vertices_.size());
    for (const auto& [key, e] : edges_) {
      adj[key.first].push_back(key.second);
      adj[key.second].push_back(key.first);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
  }

  std::size_t degree(VertexId v) const {
    std::size_t d = 0;
    for (const auto& [key, e] : edges_) d += (key.first == v || key.second == v) ? 1 : 0;
    return d;
  }

  /// Clustering whose clusters are the vertices' member sets.
  Clustering clustering() const {
    std::map<std::string, std::vector<PointId>> clusters;
    for (const auto& v : vertices_) clusters.emplace(v.id, v.members);
    return Clustering::infer(clusters);
  }

  friend bool operator==(const ClusterGraphModel& a, const ClusterGraphModel& b) {
    return a.vertices_ == b.vertices_ && a.edges_ == b.edges_ && a.metric_tag_ == b.metric_tag_ &&
           a.knn_k_ == b.knn_k_ && a.global_distortion_ == b.global_distortion_;
  }

 private:
  std::vector<Vertex> vertices_;
  std::map<EdgeKey, Edge> edges_;
  std::string metric_tag_;
  std::size_t knn_k_ = 0;
  std::optional<double> global_distortion_;
  detail::PathMemo memo_;
};

/// Connected components of the current edge set, numbered by smallest vertex index.
inline std::vector<int> connected_components(const ClusterGraphModel& graph) {
  const auto adj = graph.adjacency();
  std::vector<int> label(graph.vertex_count(), -1);
  int next = 0;
  std::vector<VertexId> stack;
  for (VertexId s = 0; s < label.size(); ++s) {
    if (label[s] != -1) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const VertexId v = stack.back();
      stack.pop_back();
      for (VertexId u : adj[v]) {
        if (label[u] == -1) {
          label[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return label;
}

inline std::size_t component_count(const std::vector<int>& labels) {
  int top = -1;
  for (int l : labels) top = std::max(top, l);
  return static_cast<std::size_t>(top + 1);
}

/// Edges whose removal disconnects their component (Tarjan low-link).
inline std::set<EdgeKey> bridges(const ClusterGraphModel& graph) {
  const auto adj = graph.adjacency();
  const std::size_t n = graph.vertex_count();
  std::vector<int> order(n, -1), low(n, 0);
  std::set<EdgeKey> out;
  int clock = 0;

  struct Frame {
    VertexId v;
    VertexId parent;
    std::size_t next;
  };
  std::vector<Frame> stack;
  for (VertexId root = 0; root < n; ++root) {
    if (order[root] != -1) continue;
    order[root] = low[root] = clock++;
    stack.push_back({root, root, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adj[f.v].size()) {
        const VertexId u = adj[f.v][f.next++];
        if (u == f.parent) continue;  // simple graph: at most one edge to the parent
        if (order[u] == -1) {
          order[u] = low[u] = clock++;
          stack.push_back({u, f.v, 0});
        } else {
          low[f.v] = std::min(low[f.v], order[u]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame& parent = stack.back();
          low[parent.v] = std::min(low[parent.v], low[done.v]);
          if (low[done.v] > order[parent.v]) out.insert(make_edge_key(parent.v, done.v));
        }
      }
    }
  }
  return out;
}

/// Checks the model invariants: finite nonnegative weights, original edges inside one
/// geodesic component, and composition fractions summing to one.
inline void validate(const ClusterGraphModel& graph) {
  for (const auto& [key, e] : graph.edges()) {
    if (key.first >= key.second || key.second >= graph.vertex_count()) {
      throw internal_error("malformed edge key");
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) throw internal_error("invalid edge weight");
    if (e.provenance == Provenance::original &&
        graph.vertex(key.first).component != graph.vertex(key.second).component) {
      throw internal_error("original edge across geodesic components");
    }
  }
  for (const auto& v : graph.vertices()) {
    if (v.members.empty()) throw internal_error("vertex '" + v.id + "' has no members");
    double total = 0.0;
    for (const auto& [label, fraction] : v.composition) total += fraction;
    if (!v.composition.empty() && std::abs(total - 1.0) > 1e-9) {
      throw internal_error("composition of '" + v.id + "' does not sum to 1");
    }
  }
}

}  // namespace clustergraph
