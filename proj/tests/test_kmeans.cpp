#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace clustergraph;

namespace {

std::vector<std::vector<PointId>> groups(const Clustering& c) {
  std::vector<std::vector<PointId>> out;
  for (std::size_t i = 0; i < c.size(); ++i) out.emplace_back(c.members(i).begin(), c.members(i).end());
  std::sort(out.begin(), out.end());
  return out;
}

// Smallest within-cluster sum of squares over all 2-partitions of 1-D points.
std::vector<std::vector<PointId>> best_two_partition(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<PointId>> arg;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<PointId> a, b;
    for (PointId i = 0; i < n; ++i) ((mask >> i) & 1 ? a : b).push_back(i);
    auto wcss = [&](const std::vector<PointId>& s) {
      double m = 0.0;
      for (auto i : s) m += xs[i];
      m /= double(s.size());
      double t = 0.0;
      for (auto i : s) t += (xs[i] - m) * (xs[i] - m);
      return t;
    };
    const double v = wcss(a) + wcss(b);
    if (v < best) {
      best = v;
      arg = {a, b};
      std::sort(arg.begin(), arg.end());
    }
  }
  return arg;
}

}  // namespace

TEST(KMeans, TwoObviousGroups) {
  const std::vector<double> xs = {0, 1, 10, 11};
  const auto expected = best_two_partition(xs);
  const auto cloud = PointCloud::from_coordinates({{0.0}, {1.0}, {10.0}, {11.0}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_EQ(groups(kmeans(cloud, 2, seed)), expected);
}

TEST(KMeans, ExtremeK) {
  const auto cloud = fixtures::uniform_cloud(7, 2, 4);
  const auto singles = kmeans(cloud, 7, 1);
  EXPECT_EQ(singles.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(singles.members(i).size(), 1u);
  const auto one = kmeans(cloud, 1, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.members(0).size(), 7u);
  EXPECT_THROW(kmeans(cloud, 0, 1), Error);
  EXPECT_THROW(kmeans(cloud, 8, 1), Error);
}

TEST(KMeans, DeterministicAndMonotone) {
  const auto cloud = fixtures::uniform_cloud(200, 3, 8);
  const auto a = kmeans_detailed(cloud, 12, 5);
  const auto b = kmeans_detailed(cloud, 12, 5);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.clustering.as_map(), b.clustering.as_map());
  EXPECT_TRUE(a.converged);
  for (std::size_t i = 1; i < a.wcss_history.size(); ++i) EXPECT_LE(a.wcss_history[i], a.wcss_history[i - 1] + 1e-9);
  EXPECT_EQ(a.clustering.kind(), Clustering::Kind::partition);
  EXPECT_NO_THROW(validate(cloud, a.clustering));
}

TEST(KMeans, NamesOrderedBySmallestMember) {
  const auto cloud = fixtures::uniform_cloud(50, 2, 3);
  const auto c = kmeans(cloud, 12, 2);
  ASSERT_EQ(c.id(0), "c00");
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LT(c.members(i - 1).front(), c.members(i).front());
}

TEST(KMeans, RejectsDistanceMatrices) {
  const auto cloud = PointCloud::from_distance_matrix({{0, 1}, {1, 0}});
  EXPECT_THROW(kmeans(cloud, 1, 0), Error);
}

TEST(PerLabel, MonochromaticClusters) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    rows.push_back({rng.uniform(), rng.uniform()});
    labels.push_back(i % 2 ? "odd" : "even");
  }
  const auto cloud = PointCloud::from_coordinates(rows, labels);
  const auto c = per_label_clustering(cloud, labels, 5, 3);
  EXPECT_EQ(c.size(), 10u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& label = labels[c.members(i).front()];
    for (auto p : c.members(i)) EXPECT_EQ(labels[p], label);
    EXPECT_EQ(c.id(i).substr(0, label.size() + 1), label + "/");
  }
  const auto coarse = per_label_clustering(cloud, labels, 1, 3);
  EXPECT_EQ(coarse.size(), 2u);
  EXPECT_EQ(per_label_clustering(cloud, labels, 5, 3).as_map(), c.as_map());
}
