// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any of them fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace clustergraph;

namespace {

const std::filesystem::path data_dir = CLUSTERGRAPH_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

struct RandomInstance {
  PointCloud cloud;
  Clustering clustering;
  GeodesicIndex index;
  ClusterGraphModel graph;
};

// Random point set with a k-means clustering; retries seeds whose clusters straddle
// k-nn components.
RandomInstance random_instance(std::uint64_t seed, std::size_t max_points) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    const std::size_t n = 20 + rng.below(max_points - 19);
    auto cloud = fixtures::uniform_cloud(n, 2 + rng.below(2), rng.next());
    auto clustering = kmeans(cloud, 3 + rng.below(6), rng.next());
    auto index = build_knn_graph(cloud, 3 + rng.below(5));
    try {
      auto graph = build_cluster_graph(cloud, clustering, index, ClusterMetricChoice{});
      return {std::move(cloud), std::move(clustering), std::move(index), std::move(graph)};
    } catch (const Error&) {
    }
  }
}

Outcome four_cluster_k4() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  io::PointLoadOptions options;
  options.distance_matrix = true;
  const auto cloud = io::load_points(data_dir / "four_clusters_matrix.csv", options);
  const auto clustering = io::load_clustering(data_dir / "four_clusters_clustering.csv", cloud.size());
  const auto index = build_knn_graph(cloud, 10);
  for (const char* metric : {"avg", "min"}) {
    const auto g = build_cluster_graph(cloud, clustering, index, ClusterMetricChoice::parse(metric));
    std::vector<double> weights;
    for (const auto& [key, e] : g.edges()) weights.push_back(e.weight);
    std::sort(weights.begin(), weights.end());
    out.require(g.vertex_count() == 4 && weights.size() == 6, std::string(metric) + ": not a K4");
    const std::vector<double> expected = {1, 1, 1, 2, 2, 2};
    for (std::size_t i = 0; i < weights.size() && i < 6; ++i) {
      out.require(std::abs(weights[i] - expected[i]) <= 1e-9, std::string(metric) + ": weight " + fmt(weights[i]));
    }
  }
  const double t = seconds_since(start);
  out.require(t < 1.0, "took " + fmt(t) + " s");
  if (out.pass) out.detail = "weights {1,1,1,2,2,2} for avg and min in " + fmt(t) + " s";
  return out;
}

PipelineConfig circles_config(const std::filesystem::path& output) {
  auto config = PipelineConfig::load(data_dir / "circles.cfg");
  config.points = (data_dir / "circles.csv").string();
  config.output_dir = output.string();
  return config;
}

Outcome circles_pipeline() {
  Outcome out;
  TempDir dir("acceptance");
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream log;
  run_pipeline(circles_config(dir.path()), log);
  const double t = seconds_since(start);

  const auto pruned = io::load_graph(dir / "graph_pruned.json");
  const auto labels = connected_components(pruned);
  const std::size_t components = component_count(labels);
  out.require(components == 2, "pruned graph has " + std::to_string(components) + " components");
  std::map<int, std::pair<std::size_t, std::size_t>> degree_two;  // component -> (degree 2, total)
  for (VertexId v = 0; v < pruned.vertex_count(); ++v) {
    auto& [two, total] = degree_two[labels[v]];
    ++total;
    if (pruned.degree(v) == 2) ++two;
  }
  std::string shares;
  for (const auto& [c, counts] : degree_two) {
    const double share = double(counts.first) / double(counts.second);
    shares += (shares.empty() ? "" : ", ") + std::to_string(counts.first) + "/" + std::to_string(counts.second);
    out.require(share >= 0.9, "component " + std::to_string(c) + " has degree-2 share " + fmt(share));
  }

  const auto final_graph = io::load_graph(dir / "graph.json");
  out.require(component_count(connected_components(final_graph)) == 1, "merged graph is not connected");
  for (const auto& [key, e] : pruned.edges()) {
    const bool kept = final_graph.has_edge(key.first, key.second) &&
                      final_graph.edge(key.first, key.second).provenance == Provenance::original;
    out.require(kept, "original edge removed during merge pruning");
  }
  const auto trace = nlohmann::json::parse(io::read_text(dir / "merge_trace.json"));
  out.require(trace["steps"].size() == 20, "merge pruning removed " + std::to_string(trace["steps"].size()) + " edges");
  out.require(t < 30.0, "took " + fmt(t) + " s");
  if (out.pass) out.detail = "2 cycles (degree-2 " + shares + "), connected after merge, " + fmt(t) + " s";
  return out;
}

Outcome distortion_oracle() {
  Outcome out;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = random_instance(1000 + seed, 60);
    // Remove some non-bridge edges so d_CG is not always the direct weight.
    Rng rng(seed);
    for (const auto& [key, e] : std::map<EdgeKey, Edge>(inst.graph.edges())) {
      if (rng.uniform() < 0.4 && !bridges(inst.graph).count(key)) inst.graph.remove_edge(key.first, key.second);
    }
    const double expected =
        oracle::distortion(inst.graph, oracle::knn_geodesics(oracle::point_distances(inst.cloud), inst.index.k()));
    const auto scorer = DistortionScorer(inst.graph, inst.index);
    out.require(scorer.factorized(), "scorer did not use the factorized path");
    const double got = scorer.score(*inst.graph.shortest_paths()).global;
    worst = std::max(worst, std::abs(got - expected));
  }
  out.require(worst <= 1e-9, "max deviation " + fmt(worst));
  if (out.pass) out.detail = "10 datasets, max |fast - brute force| = " + fmt(worst);
  return out;
}

Outcome greedy_invariants() {
  Outcome out;
  std::size_t steps = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = random_instance(2000 + seed, 60);
    GreedyOptions options;
    options.scoring.seed = seed;
    const auto a = greedy_prune(inst.graph, inst.clustering, inst.index, options);
    const auto b = greedy_prune(inst.graph, inst.clustering, inst.index, options);
    const std::size_t comps = component_count(connected_components(inst.graph));
    double previous = *a.trace.initial_value;
    for (const auto& step : a.trace.steps) {
      out.require(step.criterion <= previous, "distortion increased at seed " + std::to_string(seed));
      out.require(step.components == comps, "component count changed at seed " + std::to_string(seed));
      previous = step.criterion;
    }
    bool same = a.trace.steps.size() == b.trace.steps.size() && a.graph == b.graph;
    for (std::size_t i = 0; same && i < a.trace.steps.size(); ++i) {
      same = a.trace.steps[i].edge == b.trace.steps[i].edge && a.trace.steps[i].criterion == b.trace.steps[i].criterion;
    }
    out.require(same, "rerun differs at seed " + std::to_string(seed));
    steps += a.trace.steps.size();
  }
  if (out.pass) out.detail = "20 instances, " + std::to_string(steps) + " removals checked";
  return out;
}

Outcome threshold_nestedness() {
  Outcome out;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_instance(3000 + seed, 60);
    const auto report = global_distortion(inst.graph, inst.clustering, inst.index);
    const auto graph = annotate_distortion(inst.graph, report);
    double max_delta = 0.0;
    for (const auto& [key, e] : graph.edges()) max_delta = std::max(max_delta, *e.distortion);
    std::optional<std::set<EdgeKey>> previous;
    for (int step = 1; step <= 20; ++step) {
      const double alpha = max_delta * step / 20.0;
      const auto pruned = threshold_prune(graph, alpha).graph;
      std::set<EdgeKey> kept;
      for (const auto& [key, e] : pruned.edges()) kept.insert(key);
      if (previous) {
        out.require(std::includes(kept.begin(), kept.end(), previous->begin(), previous->end()),
                    "edge sets not nested at seed " + std::to_string(seed));
      }
      previous = kept;
    }
    out.require(threshold_prune(graph, max_delta).graph == graph, "alpha = max delta pruned an edge");
  }
  if (out.pass) out.detail = "10 instances x 20 thresholds nested; alpha = max delta keeps everything";
  return out;
}

Outcome wasserstein_oracle() {
  Outcome out;
  double worst = 0.0, worst_self = 0.0, worst_sym = 0.0;
  std::size_t pairs = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cloud = fixtures::uniform_cloud(24, 3, 4000 + seed);
    const auto dist = oracle::point_distances(cloud);
    // Clusters of sizes 1..4 carved from consecutive ids.
    std::vector<std::vector<PointId>> clusters;
    PointId next = 0;
    for (std::size_t size : {1, 2, 3, 4, 1, 2, 3, 4}) {
      std::vector<PointId> c(size);
      std::iota(c.begin(), c.end(), next);
      next += size;
      clusters.push_back(c);
    }
    for (const auto& a : clusters) {
      for (const auto& b : clusters) {
        const double w = cluster_distance_wasserstein(cloud, a, b, 1.0);
        if (a.size() == b.size()) {
          worst = std::max(worst, std::abs(w - oracle::wasserstein_by_permutation(dist, a, b, 1.0)));
          ++pairs;
        }
        worst_sym = std::max(worst_sym, std::abs(w - cluster_distance_wasserstein(cloud, b, a, 1.0)));
      }
      for (double p : {1.0, 2.0, 3.5}) worst_self = std::max(worst_self, cluster_distance_wasserstein(cloud, a, a, p));
    }
  }
  out.require(worst <= 1e-9, "W1 deviates from brute force by " + fmt(worst));
  out.require(worst_self == 0.0, "W_p(C, C) = " + fmt(worst_self));
  out.require(worst_sym <= 1e-12, "asymmetry " + fmt(worst_sym));
  if (out.pass) out.detail = std::to_string(pairs) + " equal-size pairs, max error " + fmt(worst);
  return out;
}

Outcome geodesic_estimator() {
  Outcome out;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto cloud = fixtures::uniform_cloud(80, 2, 5000 + seed);
    const auto index = build_knn_graph(cloud, 4);
    for (PointId x = 0; x < cloud.size(); ++x) {
      for (PointId y = 0; y < cloud.size(); ++y) {
        const double d = index.distance(x, y);
        if (index.component(x) == index.component(y)) {
          out.require(d >= cloud.distance(x, y), "d^k < d at seed " + std::to_string(seed));
        }
      }
    }
  }
  // Evenly spaced angles under a random rotation. Independent uniform angles leave
  // gaps that split the 2-nn graph into pieces, so no finite estimate would exist.
  Rng rng(17);
  const double phase = 2.0 * std::numbers::pi * rng.uniform();
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 200; ++i) {
    const double t = phase + 2.0 * std::numbers::pi * i / 200.0;
    rows.push_back({std::cos(t), std::sin(t)});
  }
  const auto circle = PointCloud::from_coordinates(rows);
  const auto index = build_knn_graph(circle, 2);
  PointId bx = 0, by = 1;
  for (PointId x = 0; x < 200; ++x)
    for (PointId y = x + 1; y < 200; ++y)
      if (circle.distance(x, y) > circle.distance(bx, by)) {
        bx = x;
        by = y;
      }
  const double estimate = index.distance(bx, by);
  const double error = std::abs(estimate - std::numbers::pi) / std::numbers::pi;
  out.require(error <= 0.05, "antipodal estimate " + fmt(estimate));
  if (out.pass) out.detail = "d^k >= d everywhere; antipodal estimate " + fmt(estimate) + " (" + fmt(100 * error) + "% off pi)";
  return out;
}

ClusterGraphModel unit_graph(std::size_t n, const std::vector<EdgeKey>& edges) {
  std::vector<Vertex> vs;
  for (std::size_t i = 0; i < n; ++i) vs.push_back(Vertex{std::string(1, char('A' + i)), {i}, {}, 0});
  ClusterGraphModel g(vs, "avg", 1);
  for (const auto& [a, b] : edges) g.add_edge(a, b, Edge{1.0, std::nullopt, Provenance::original});
  return g;
}

Outcome connectivity_arithmetic() {
  Outcome out;
  const double path = graph_connectivity(unit_graph(3, {{0, 1}, {1, 2}}));
  const auto triangle = unit_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  const double tri = graph_connectivity(triangle);
  ConnectivityStop stop;
  stop.budget = 1;
  const auto pruned = connectivity_prune(triangle, std::nullopt, stop);
  const double rk = pruned.trace.steps.empty() ? 0.0 : pruned.trace.steps[0].criterion;
  out.require(std::abs(path - 5.0 / 6.0) <= 1e-9, "path connectivity " + fmt(path));
  out.require(std::abs(tri - 1.0) <= 1e-9, "triangle connectivity " + fmt(tri));
  out.require(std::abs(rk - 5.0 / 6.0) <= 1e-9, "triangle rk " + fmt(rk));
  if (out.pass) out.detail = "path " + fmt(path) + ", triangle " + fmt(tri) + ", rk " + fmt(rk);
  return out;
}

Clustering grid_cells(const PointCloud& cloud, double side, double ox, double oy) {
  std::map<std::string, std::vector<PointId>> cells;
  for (PointId p = 0; p < cloud.size(); ++p) {
    const auto c = cloud.coordinates(p);
    cells[std::to_string(long(std::floor((c[0] + ox) / side))) + ":" +
          std::to_string(long(std::floor((c[1] + oy) / side)))]
        .push_back(p);
  }
  return Clustering(cells, Clustering::Kind::partition);
}

Outcome stability_bounds() {
  Outcome out;
  std::size_t violations = 0;
  double worst_image = 0.0, worst_min = 0.0, worst_max = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(6000 + seed);
    const auto cloud = fixtures::uniform_cloud(60, 2, rng.next());
    const double side = 0.1 + 0.3 * rng.uniform();
    const double delta = side * std::sqrt(2.0);
    const auto first = grid_cells(cloud, side, side * rng.uniform(), side * rng.uniform());
    const auto second = grid_cells(cloud, side, side * rng.uniform(), side * rng.uniform());
    const auto report = check_stability(cloud, first, second, delta);
    violations += report.violations;
    worst_image = std::max(worst_image, report.worst_image_ratio);
    worst_min = std::max(worst_min, report.worst_clique_ratio.at("min"));
    worst_max = std::max({worst_max, report.worst_clique_ratio.at("max"), report.worst_clique_ratio.at("avg")});
  }
  out.require(violations == 0, std::to_string(violations) + " violations");
  if (out.pass) {
    out.detail = "100 pairs; worst ratios image " + fmt(worst_image) + ", max/avg clique " + fmt(worst_max) +
                 ", min clique " + fmt(worst_min);
  }
  return out;
}

Outcome determinism() {
  Outcome out;
  TempDir first("determinism_a"), second("determinism_b");
  std::ostringstream log;
  auto config_a = circles_config(first.path());
  auto config_b = circles_config(second.path());
  config_b.threads = 1;  // also vary the worker count
  const auto a = run_pipeline(config_a, log);
  run_pipeline(config_b, log);
  std::size_t compared = 0;
  for (const auto& path : a.artifacts) {
    const auto name = path.filename();
    out.require(io::read_text(first / name.string()) == io::read_text(second / name.string()),
                name.string() + " differs between runs");
    ++compared;
  }
  out.require(compared >= 8, "only " + std::to_string(compared) + " artifacts written");
  if (out.pass) out.detail = std::to_string(compared) + " artifacts byte-identical across two runs";
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"four-cluster distance matrix gives the exact K4", four_cluster_k4},
      {"concentric circles pipeline recovers two cycles and merges them", circles_pipeline},
      {"factorized distortion equals brute force", distortion_oracle},
      {"greedy pruning is monotone, component-preserving and reproducible", greedy_invariants},
      {"threshold pruning is nested in alpha", threshold_nestedness},
      {"Wasserstein solver equals permutation brute force", wasserstein_oracle},
      {"k-nn geodesic estimator", geodesic_estimator},
      {"connectivity arithmetic", connectivity_arithmetic},
      {"image diameter bounds on random grid clusterings", stability_bounds},
      {"pipeline artifacts are deterministic", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << i + 1 << ". " << criteria[i].first << ": "
              << outcome.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
