#include <gtest/gtest.h>

#include <thread>

#include "fixtures.hpp"

using namespace clustergraph;

TEST(PointCloud, EuclideanDistance) {
  const auto cloud = PointCloud::from_coordinates({{0.0, 0.0}, {3.0, 4.0}});
  EXPECT_DOUBLE_EQ(cloud.distance(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(cloud.distance(1, 1), 0.0);
  EXPECT_EQ(cloud.dimension(), 2u);
}

TEST(PointCloud, ManhattanAndGeneralMinkowski) {
  const auto l1 = PointCloud::from_coordinates({{0.0, 0.0}, {3.0, 4.0}}, {}, 1.0);
  EXPECT_DOUBLE_EQ(l1.distance(0, 1), 7.0);
  const auto l3 = PointCloud::from_coordinates({{0.0, 0.0}, {3.0, 4.0}}, {}, 3.0);
  EXPECT_NEAR(l3.distance(0, 1), std::cbrt(27.0 + 64.0), 1e-12);
}

TEST(PointCloud, MatrixPassThrough) {
  const auto cloud = PointCloud::from_distance_matrix({{0, 2, 1}, {2, 0, 4}, {1, 4, 0}});
  EXPECT_EQ(cloud.mode(), PointCloud::Mode::distance_matrix);
  EXPECT_DOUBLE_EQ(cloud.distance(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(cloud.distance(2, 1), 4.0);
}

TEST(PointCloud, RejectsMalformedInput) {
  EXPECT_THROW(PointCloud::from_coordinates({{0.0, 1.0}, {2.0}}), Error);
  EXPECT_THROW(PointCloud::from_coordinates({{0.0, std::nan("")}}), Error);
  EXPECT_THROW(PointCloud::from_coordinates({{0.0}, {1.0}}, {}, 0.5), Error);
  EXPECT_THROW(PointCloud::from_distance_matrix({{0, 1}, {2, 0}}), Error);
  EXPECT_THROW(PointCloud::from_distance_matrix({{1, 1}, {1, 0}}), Error);
  EXPECT_THROW(PointCloud::from_distance_matrix({{0, -1}, {-1, 0}}), Error);
  EXPECT_THROW(PointCloud::from_distance_matrix({{0, 1, 2}, {1, 0, 2}}), Error);
}

TEST(PointCloud, LabelsDefaultToUnlabeled) {
  const auto plain = PointCloud::from_coordinates({{0.0}, {1.0}});
  EXPECT_FALSE(plain.has_labels());
  EXPECT_EQ(plain.label(0), kUnlabeled);
  const auto labelled = PointCloud::from_coordinates({{0.0}, {1.0}}, {"a", "b"});
  EXPECT_EQ(labelled.label(1), "b");
  EXPECT_THROW(PointCloud::from_coordinates({{0.0}, {1.0}}, {"a"}), Error);
}

TEST(Clustering, PartitionAndDivisionKinds) {
  using K = Clustering::Kind;
  EXPECT_NO_THROW(Clustering({{"A", {0, 1}}, {"B", {2}}}, K::partition));
  try {
    Clustering({{"A", {0, 1}}, {"B", {1, 2}}}, K::partition);
    FAIL() << "overlap accepted";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("overlap under partition kind"), std::string::npos);
    EXPECT_EQ(e.kind(), ErrorKind::input);
  }
  const Clustering soft({{"A", {0, 1}}, {"B", {1, 2}}}, K::division);
  EXPECT_EQ(soft.kind(), K::division);
  EXPECT_EQ(Clustering::infer({{"A", {0, 1}}, {"B", {1, 2}}}).kind(), K::division);
  EXPECT_EQ(Clustering::infer({{"A", {0}}, {"B", {1, 2}}}).kind(), K::partition);
}

TEST(Clustering, ValidatesAgainstCloud) {
  const auto cloud = PointCloud::from_coordinates({{0.0}, {1.0}, {2.0}});
  EXPECT_NO_THROW(validate(cloud, Clustering({{"A", {0, 1}}, {"B", {2}}}, Clustering::Kind::partition)));
  EXPECT_THROW(validate(cloud, Clustering({{"A", {0, 1}}}, Clustering::Kind::partition)), Error);
  EXPECT_THROW(validate(cloud, Clustering({{"A", {0, 1, 2, 7}}}, Clustering::Kind::partition)), Error);
  EXPECT_THROW(Clustering({{"A", {}}}, Clustering::Kind::partition), Error);
}

TEST(Clustering, MembersSortedAndDeduplicated) {
  const Clustering c({{"A", {3, 1, 3}}, {"B", {0, 2}}}, Clustering::Kind::partition);
  ASSERT_EQ(c.size(), 2u);
  const auto m = c.members(*c.index_of("A"));
  EXPECT_EQ(std::vector<PointId>(m.begin(), m.end()), (std::vector<PointId>{1, 3}));
}

TEST(Errors, ExitCodesFollowKinds) {
  EXPECT_EQ(exit_code(ErrorKind::input), 1);
  EXPECT_EQ(exit_code(ErrorKind::config), 2);
  EXPECT_EQ(exit_code(ErrorKind::internal), 3);
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
  std::vector<double> one(1000), many(1000);
  parallel_for(one.size(), Parallelism{1}, [&](std::size_t i) { one[i] = std::sqrt(double(i)); });
  parallel_for(many.size(), Parallelism{4}, [&](std::size_t i) { many[i] = std::sqrt(double(i)); });
  EXPECT_EQ(one, many);
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, Parallelism{3}, [](std::size_t i) {
                 if (i == 7) throw input_error("boom");
               }),
               Error);
}

TEST(Random, ReproducibleAndBounded) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.below(17);
    EXPECT_EQ(x, b.below(17));
    EXPECT_LT(x, 17u);
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
}
