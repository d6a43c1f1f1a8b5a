#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "clustergraph/error.hpp"

namespace clustergraph {

/// Exact solver for the balanced transportation problem
///   minimize sum_ij flow(i,j) * cost(i,j)
///   s.t. sum_j flow(i,j) = supply[i], sum_i flow(i,j) = demand[j], flow >= 0,
/// with integer supplies/demands. Successive shortest paths with Johnson potentials
/// on the bipartite residual network; each augmentation pushes the bottleneck amount.
/// `cost(i, j)` must return a finite nonnegative value. Returns the optimal cost.
template <typename CostFn>
double min_cost_transport(std::span<const std::int64_t> supply, std::span<const std::int64_t> demand,
                          CostFn&& cost) {
  const std::int64_t total_supply = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
  const std::int64_t total_demand = std::accumulate(demand.begin(), demand.end(), std::int64_t{0});
  if (total_supply != total_demand) throw internal_error("unbalanced transportation problem");
  if (total_supply == 0) return 0.0;

  struct Arc {
    std::size_t to;
    std::size_t rev;
    std::int64_t cap;
    double cost;
  };
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  const std::size_t source = m + n;
  const std::size_t sink = m + n + 1;
  const std::size_t nodes = m + n + 2;
  std::vector<std::vector<Arc>> graph(nodes);
  auto add_arc = [&](std::size_t u, std::size_t v, std::int64_t cap, double c) {
    graph[u].push_back({v, graph[v].size(), cap, c});
    graph[v].push_back({u, graph[u].size() - 1, 0, -c});
  };
  for (std::size_t i = 0; i < m; ++i) add_arc(source, i, supply[i], 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      add_arc(i, m + j, std::numeric_limits<std::int64_t>::max() / 4, cost(i, j));
    }
  }
  for (std::size_t j = 0; j < n; ++j) add_arc(m + j, sink, demand[j], 0.0);

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> potential(nodes, 0.0), dist(nodes);
  std::vector<std::size_t> prev_node(nodes), prev_arc(nodes);
  std::vector<char> done(nodes);
  std::int64_t remaining = total_supply;

  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(done.begin(), done.end(), 0);
    dist[source] = 0.0;
    // Dense Dijkstra: the residual network is nearly complete bipartite.
    for (;;) {
      std::size_t u = nodes;
      for (std::size_t v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < inf && (u == nodes || dist[v] < dist[u])) u = v;
      }
      if (u == nodes) break;
      done[u] = 1;
      for (std::size_t a = 0; a < graph[u].size(); ++a) {
        const Arc& arc = graph[u][a];
        if (arc.cap <= 0 || done[arc.to]) continue;
        const double reduced = std::max(0.0, arc.cost + potential[u] - potential[arc.to]);
        if (dist[u] + reduced < dist[arc.to]) {
          dist[arc.to] = dist[u] + reduced;
          prev_node[arc.to] = u;
          prev_arc[arc.to] = a;
        }
      }
    }
    if (dist[sink] == inf) throw internal_error("transport solver found no augmenting path");
    for (std::size_t v = 0; v < nodes; ++v) {
      if (dist[v] < inf) potential[v] += dist[v];
    }
    std::int64_t push = remaining;
    for (std::size_t v = sink; v != source; v = prev_node[v]) {
      push = std::min(push, graph[prev_node[v]][prev_arc[v]].cap);
    }
    for (std::size_t v = sink; v != source; v = prev_node[v]) {
      Arc& arc = graph[prev_node[v]][prev_arc[v]];
      arc.cap -= push;
      graph[v][arc.rev].cap += push;
    }
    remaining -= push;
  }

  // Flow on an arc i -> j equals the capacity of its reverse arc.
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (const Arc& arc : graph[i]) {
      if (arc.to >= m && arc.to < m + n) {
        const std::int64_t flow = graph[arc.to][arc.rev].cap;
        if (flow > 0) total += static_cast<double>(flow) * arc.cost;
      }
    }
  }
  return total;
}

}  // namespace clustergraph
