#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace clustergraph;

namespace {

ClusterGraphModel four_cluster_graph(const char* metric = "avg") {
  const auto cloud = PointCloud::from_distance_matrix(fixtures::four_cluster_matrix());
  const auto clustering = fixtures::four_cluster_partition();
  const auto index = build_knn_graph(cloud, 10);
  return build_cluster_graph(cloud, clustering, index, ClusterMetricChoice::parse(metric));
}

}  // namespace

TEST(BuildGraph, FourClusterMatrixGivesK4) {
  for (auto metric : {"avg", "min", "max", "hausdorff", "wasserstein"}) {
    const auto g = four_cluster_graph(metric);
    ASSERT_EQ(g.vertex_count(), 4u);
    ASSERT_EQ(g.edge_count(), 6u);
    for (const auto& [key, e] : g.edges()) {
      const double expected = key.first == 0 ? 1.0 : 2.0;
      EXPECT_NEAR(e.weight, expected, 1e-9) << metric;
      EXPECT_EQ(e.provenance, Provenance::original);
    }
    EXPECT_NO_THROW(validate(g));
  }
}

TEST(BuildGraph, ClusterGraphDistance) {
  auto g = four_cluster_graph();
  const auto clustering = fixtures::four_cluster_partition();
  EXPECT_DOUBLE_EQ(cluster_graph_distance(g, clustering, 5, 10), 2.0);
  EXPECT_DOUBLE_EQ(cluster_graph_distance(g, clustering, 5, 6), 0.0);
  g.remove_edge(1, 2);
  EXPECT_DOUBLE_EQ(cluster_graph_distance(g, clustering, 5, 10), 2.0);  // through vertex 0
}

TEST(BuildGraph, SingleCluster) {
  const auto cloud = fixtures::uniform_cloud(6, 2, 1);
  const Clustering one({{"all", {0, 1, 2, 3, 4, 5}}}, Clustering::Kind::partition);
  const auto g = build_cluster_graph(cloud, one, build_knn_graph(cloud, 2), ClusterMetricChoice{});
  EXPECT_EQ(g.vertex_count(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(BuildGraph, CompletePerComponent) {
  const auto cloud = fixtures::circles(100, 1.0, 2.0, 3);
  const auto clustering = kmeans(cloud, 10, 0);
  const auto index = build_knn_graph(cloud, 5);
  const auto g = build_cluster_graph(cloud, clustering, index, ClusterMetricChoice{});
  ASSERT_EQ(index.component_count(), 2u);
  std::map<int, std::size_t> sizes;
  for (const auto& v : g.vertices()) sizes[v.component]++;
  std::size_t expected_edges = 0;
  for (const auto& [c, n] : sizes) expected_edges += n * (n - 1) / 2;
  EXPECT_EQ(g.edge_count(), expected_edges);
  for (const auto& [key, e] : g.edges()) EXPECT_EQ(g.vertex(key.first).component, g.vertex(key.second).component);
  EXPECT_EQ(component_count(connected_components(g)), 2u);
}

TEST(BuildGraph, StraddlingClusterIsAnInputError) {
  const auto cloud = PointCloud::from_coordinates({{0.0}, {0.1}, {10.0}, {10.1}});
  const auto index = build_knn_graph(cloud, 1);
  ASSERT_EQ(index.component_count(), 2u);
  const Clustering bad({{"a", {0, 2}}, {"b", {1, 3}}}, Clustering::Kind::partition);
  try {
    build_cluster_graph(cloud, bad, index, ClusterMetricChoice{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input);
  }
}

TEST(BuildGraph, CompositionSumsToOne) {
  const auto cloud = PointCloud::from_coordinates({{0.0}, {1.0}, {2.0}, {3.0}}, {"x", "y", "x", "x"});
  const Clustering c({{"a", {0, 1, 2}}, {"b", {3}}}, Clustering::Kind::partition);
  const auto g = build_cluster_graph(cloud, c, build_knn_graph(cloud, 1), ClusterMetricChoice{});
  EXPECT_NEAR(g.vertex(0).composition.at("x"), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(g.vertex(0).composition.at("y"), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(g.vertex(1).composition.at("x"), 1.0);
}

TEST(Model, EdgeInvariants) {
  ClusterGraphModel g({Vertex{"a", {0}, {}, 0}, Vertex{"b", {1}, {}, 0}, Vertex{"c", {2}, {}, 1}}, "avg", 1);
  EXPECT_THROW(g.add_edge(0, 0, Edge{1.0}), Error);
  EXPECT_THROW(g.add_edge(0, 1, Edge{-1.0}), Error);
  EXPECT_THROW(g.add_edge(0, 1, Edge{std::nan("")}), Error);
  EXPECT_THROW(g.add_edge(0, 2, Edge{1.0}), Error);  // original edge across components
  EXPECT_NO_THROW(g.add_edge(0, 2, Edge{1.0, std::nullopt, Provenance::merge}));
  g.add_edge(1, 0, Edge{2.0});
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_EQ(g.edge(1, 0).weight, 2.0);
  EXPECT_EQ(g.degree(0), 2u);
  g.remove_edge(0, 1);
  EXPECT_FALSE(g.has_edge(0, 1));
}

TEST(Model, ShortestPathsFollowEdits) {
  ClusterGraphModel g({Vertex{"a", {0}, {}, 0}, Vertex{"b", {1}, {}, 0}, Vertex{"c", {2}, {}, 0}}, "avg", 1);
  g.add_edge(0, 1, Edge{1.0});
  g.add_edge(1, 2, Edge{1.0});
  g.add_edge(0, 2, Edge{5.0});
  EXPECT_EQ((*g.shortest_paths())(0, 2), 2.0);
  g.remove_edge(1, 2);
  EXPECT_EQ((*g.shortest_paths())(0, 2), 5.0);
  const ClusterGraphModel copy = g;
  EXPECT_EQ((*copy.shortest_paths())(1, 2), 6.0);
}

TEST(Model, BridgesMatchBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<Vertex> vs;
    for (int i = 0; i < 9; ++i) vs.push_back(Vertex{"v" + std::to_string(i), {PointId(i)}, {}, 0});
    ClusterGraphModel g(vs, "avg", 1);
    for (VertexId a = 0; a < 9; ++a)
      for (VertexId b = a + 1; b < 9; ++b)
        if (rng.uniform() < 0.25) g.add_edge(a, b, Edge{1.0});
    const auto found = bridges(g);
    const std::size_t before = component_count(connected_components(g));
    for (const auto& [key, e] : g.edges()) {
      ClusterGraphModel h = g;
      h.remove_edge(key.first, key.second);
      const bool is_bridge = component_count(connected_components(h)) > before;
      EXPECT_EQ(found.count(key) == 1, is_bridge) << seed;
    }
  }
}
