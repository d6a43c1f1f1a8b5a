#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustergraph/clustering.hpp"
#include "clustergraph/distortion.hpp"
#include "clustergraph/error.hpp"
#include "clustergraph/geodesics.hpp"
#include "clustergraph/graph_build.hpp"
#include "clustergraph/io.hpp"
#include "clustergraph/kmeans.hpp"
#include "clustergraph/metrics.hpp"
#include "clustergraph/model.hpp"
#include "clustergraph/pruning.hpp"

namespace clustergraph {

enum class PruneStrategy { none, threshold, greedy, connectivity };

/// Declarative pipeline configuration. Defaults reproduce the concentric-circles run:
/// k-means with 20 centroids, 10-nn geodesics, average linkage, greedy pruning, then
/// merging with 3 neighbors and connectivity pruning of 20 merge edges.
struct PipelineConfig {
  std::string points;
  bool distance_matrix = false;
  std::string label_column = "label";
  double minkowski = 2.0;
  /// Clustering CSV; when empty the pipeline runs k-means.
  std::string clustering;
  std::size_t kmeans_k = 20;
  /// When positive, cluster every class separately into this many clusters.
  std::size_t per_label_k = 0;
  std::uint64_t seed = 0;
  std::size_t knn_k = 10;
  std::string metric = "avg";
  double wasserstein_p = 1.0;
  std::string prune = "greedy";
  double alpha = 0.0;
  std::size_t max_steps = 0;            // 0: unbounded
  std::size_t connectivity_budget = 0;  // 0: no budget
  double connectivity_floor = 0.0;      // 0: no floor
  std::size_t merge_k = 3;              // 0: no merging
  std::size_t merge_budget = 20;
  std::size_t max_pairs = 0;
  std::string output_dir = "clustergraph_out";
  unsigned threads = 0;

  /// Sets one key from its textual value.
  void set(const std::string& key, const std::string& value) {
    auto as_size = [&](std::size_t& target) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size() || v < 0) throw std::invalid_argument("");
        target = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw config_error("'" + key + "' expects a nonnegative integer, got '" + value + "'");
      }
    };
    auto as_double = [&](double& target) {
      try {
        std::size_t used = 0;
        target = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw config_error("'" + key + "' expects a number, got '" + value + "'");
      }
    };
    auto as_bool = [&](bool& target) {
      if (value == "true" || value == "1" || value == "yes") {
        target = true;
      } else if (value == "false" || value == "0" || value == "no") {
        target = false;
      } else {
        throw config_error("'" + key + "' expects true or false, got '" + value + "'");
      }
    };
    if (key == "points") points = value;
    else if (key == "distance_matrix") as_bool(distance_matrix);
    else if (key == "label_column") label_column = value;
    else if (key == "minkowski") as_double(minkowski);
    else if (key == "clustering") clustering = value;
    else if (key == "kmeans_k") as_size(kmeans_k);
    else if (key == "per_label_k") as_size(per_label_k);
    else if (key == "seed") {
      std::size_t s = 0;
      as_size(s);
      seed = s;
    }
    else if (key == "knn_k") as_size(knn_k);
    else if (key == "metric") metric = value;
    else if (key == "wasserstein_p") as_double(wasserstein_p);
    else if (key == "prune") prune = value;
    else if (key == "alpha") as_double(alpha);
    else if (key == "max_steps") as_size(max_steps);
    else if (key == "connectivity_budget") as_size(connectivity_budget);
    else if (key == "connectivity_floor") as_double(connectivity_floor);
    else if (key == "merge_k") as_size(merge_k);
    else if (key == "merge_budget") as_size(merge_budget);
    else if (key == "max_pairs") as_size(max_pairs);
    else if (key == "output_dir") output_dir = value;
    else if (key == "threads") {
      std::size_t t = 0;
      as_size(t);
      threads = static_cast<unsigned>(t);
    }
    else throw config_error("unknown configuration key '" + key + "'");
  }

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> all = {
        "points",  "distance_matrix", "label_column", "minkowski",          "clustering",          "kmeans_k",
        "per_label_k", "seed",        "knn_k",        "metric",             "wasserstein_p",       "prune",
        "alpha",   "max_steps",       "connectivity_budget", "connectivity_floor", "merge_k",      "merge_budget",
        "max_pairs", "output_dir",    "threads"};
    return all;
  }

  /// Parses `key = value` lines; `#` starts a comment.
  static PipelineConfig parse(std::istream& in) {
    PipelineConfig config;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string trimmed = io::detail::trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw config_error("configuration line " + std::to_string(number) + " is not 'key = value'");
      }
      config.set(io::detail::trim(trimmed.substr(0, eq)), io::detail::trim(trimmed.substr(eq + 1)));
    }
    return config;
  }

  static PipelineConfig load(const std::filesystem::path& path) {
    std::istringstream in(io::read_text(path));
    return parse(in);
  }

  PruneStrategy strategy() const {
    if (prune == "none") return PruneStrategy::none;
    if (prune == "threshold") return PruneStrategy::threshold;
    if (prune == "greedy") return PruneStrategy::greedy;
    if (prune == "connectivity") return PruneStrategy::connectivity;
    throw config_error("unknown prune strategy '" + prune + "' (expected none, threshold, greedy or connectivity)");
  }

  void validate() const {
    if (points.empty()) throw config_error("'points' is required");
    (void)strategy();
    (void)ClusterMetricChoice::parse(metric, wasserstein_p);
    if (strategy() == PruneStrategy::threshold && !(alpha > 0.0)) {
      throw config_error("threshold pruning needs alpha > 0");
    }
    if (clustering.empty() && distance_matrix) {
      throw config_error("a distance-matrix input needs a clustering file (k-means needs coordinates)");
    }
    if (connectivity_floor < 0.0 || connectivity_floor > 1.0) {
      throw config_error("connectivity_floor must lie in [0, 1]");
    }
  }
};

struct PipelineSummary {
  nlohmann::json stages = nlohmann::json::array();
  std::map<std::string, double> timings_ms;
  std::vector<std::filesystem::path> artifacts;

  nlohmann::json to_json(bool with_timings) const {
    nlohmann::json doc = {{"stages", stages}};
    nlohmann::json files = nlohmann::json::array();
    for (const auto& a : artifacts) files.push_back(a.filename().string());
    doc["artifacts"] = files;
    if (with_timings) doc["timings_ms"] = timings_ms;
    return doc;
  }
};

/// Runs load -> cluster -> k-nn index -> ClusterGraph -> distortion -> prune ->
/// (merge + connectivity pruning of merge edges) -> export. Progress goes to `log`.
/// Errors are rethrown with the failing stage's name.
inline PipelineSummary run_pipeline(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  const Parallelism parallelism{config.threads};
  const std::filesystem::path out_dir = config.output_dir;
  PipelineSummary summary;

  auto stage = [&](const std::string& name, auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const Error& ex) {
      throw Error(ex.kind(), "[" + name + "] " + ex.what());
    } catch (const std::exception& ex) {
      throw internal_error("[" + name + "] " + ex.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    summary.timings_ms[name] = ms;
    log << "[" << name << "] " << ms << " ms\n";
  };
  auto write = [&](const std::string& file, const std::string& text) {
    const auto path = out_dir / file;
    io::write_text(path, text);
    summary.artifacts.push_back(path);
  };
  auto graph_stats = [](const ClusterGraphModel& g) {
    return nlohmann::json{{"vertices", g.vertex_count()},
                          {"edges", g.edge_count()},
                          {"components", component_count(connected_components(g))}};
  };

  std::optional<PointCloud> cloud;
  Clustering clustering;
  std::optional<GeodesicIndex> index;
  const ClusterMetricChoice metric = ClusterMetricChoice::parse(config.metric, config.wasserstein_p);
  ClusterGraphModel graph;
  std::optional<DistortionReport> report;

  stage("load", [&] {
    io::PointLoadOptions options;
    options.distance_matrix = config.distance_matrix;
    options.label_column = config.label_column;
    options.minkowski = config.minkowski;
    cloud = io::load_points(config.points, options);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw input_error("cannot create output directory '" + out_dir.string() + "'");
    summary.stages.push_back({{"stage", "load"}, {"points", cloud->size()}, {"dimension", cloud->dimension()}});
  });

  stage("cluster", [&] {
    std::string source;
    if (!config.clustering.empty()) {
      clustering = io::load_clustering(config.clustering, cloud->size());
      source = "file";
    } else if (config.per_label_k > 0) {
      if (!cloud->has_labels()) throw config_error("per-label clustering needs a label column");
      std::vector<std::string> labels;
      for (PointId p = 0; p < cloud->size(); ++p) labels.emplace_back(cloud->label(p));
      clustering = per_label_clustering(*cloud, labels, config.per_label_k, config.seed);
      source = "per_label_kmeans";
    } else {
      clustering = kmeans(*cloud, config.kmeans_k, config.seed);
      source = "kmeans";
    }
    validate(*cloud, clustering);
    write("clustering.csv", io::clustering_csv(clustering));
    summary.stages.push_back({{"stage", "cluster"},
                              {"source", source},
                              {"clusters", clustering.size()},
                              {"kind", std::string(to_string(clustering.kind()))}});
  });

  stage("geodesics", [&] {
    index = build_knn_graph(*cloud, config.knn_k);
    summary.stages.push_back({{"stage", "geodesics"}, {"k", config.knn_k}, {"components", index->component_count()}});
  });

  stage("build", [&] {
    graph = build_cluster_graph(*cloud, clustering, *index, metric, parallelism);
    nlohmann::json s = graph_stats(graph);
    s["stage"] = "build";
    summary.stages.push_back(s);
  });

  ScoringOptions scoring;
  scoring.max_pairs = config.max_pairs;
  scoring.seed = config.seed;
  scoring.parallelism = parallelism;

  stage("score", [&] {
    report = global_distortion(graph, clustering, *index, scoring);
    graph = annotate_distortion(graph, *report);
    write("graph_complete.json", io::dump(io::graph_to_json(graph)));
    write("distortion.json", io::dump(io::report_to_json(*report, graph)));
    summary.stages.push_back({{"stage", "score"}, {"global_distortion", report->global}});
  });

  ClusterGraphModel pruned = graph;
  stage("prune", [&] {
    std::optional<PruneResult> result;
    switch (config.strategy()) {
      case PruneStrategy::none:
        break;
      case PruneStrategy::threshold:
        result = threshold_prune(graph, config.alpha);
        break;
      case PruneStrategy::greedy: {
        GreedyOptions options;
        if (config.max_steps > 0) options.max_steps = config.max_steps;
        options.scoring = scoring;
        options.parallelism = parallelism;
        result = greedy_prune(graph, clustering, *index, options);
        break;
      }
      case PruneStrategy::connectivity: {
        ConnectivityStop stop;
        if (config.connectivity_budget > 0) stop.budget = config.connectivity_budget;
        if (config.connectivity_floor > 0.0) stop.floor = config.connectivity_floor;
        result = connectivity_prune(graph, std::nullopt, stop, parallelism);
        break;
      }
    }
    nlohmann::json s = {{"stage", "prune"}, {"strategy", config.prune}};
    if (result) {
      pruned = result->graph;
      write("prune_trace.json", io::dump(io::trace_to_json(result->trace, pruned)));
      s["removed"] = result->trace.steps.size();
      s["stop_reason"] = std::string(to_string(result->trace.stop));
      bool intact = true;
      const auto connected = connected_components(pruned);
      for (VertexId a = 0; a < pruned.vertex_count() && intact; ++a) {
        for (VertexId b = a + 1; b < pruned.vertex_count(); ++b) {
          if (pruned.vertex(a).component == pruned.vertex(b).component && connected[a] != connected[b]) {
            intact = false;
            break;
          }
        }
      }
      if (intact) {
        const DistortionReport after = global_distortion(pruned, clustering, *index, scoring);
        pruned.set_global_distortion(after.global);
        write("distortion_pruned.json", io::dump(io::report_to_json(after, pruned)));
        s["global_distortion"] = after.global;
      } else {
        pruned.set_global_distortion(std::nullopt);
        log << "[prune] pruning split a geodesic component; distortion of the pruned graph is undefined\n";
      }
      write("graph_pruned.json", io::dump(io::graph_to_json(pruned)));
    }
    nlohmann::json stats = graph_stats(pruned);
    s.update(stats);
    summary.stages.push_back(s);
  });

  ClusterGraphModel final_graph = pruned;
  if (config.merge_k > 0) {
    stage("merge", [&] {
      MergeResult merged = merge_components(pruned, *cloud, metric, config.merge_k, parallelism);
      nlohmann::json s = {{"stage", "merge"}, {"k_merge", config.merge_k}};
      if (!merged.performed) {
        log << "[merge] graph has a single component; nothing to merge\n";
        s["performed"] = false;
      } else {
        s["performed"] = true;
        s["merge_edges"] = merged.added.size();
        ClusterGraphModel merged_graph = merged.graph;
        merged_graph.set_global_distortion(std::nullopt);
        write("graph_merged.json", io::dump(io::graph_to_json(merged_graph)));
        ConnectivityStop stop;
        stop.budget = config.merge_budget;
        if (config.merge_budget > 0) {
          PruneResult trimmed = connectivity_prune(merged_graph, edges_with(merged_graph, Provenance::merge), stop,
                                                   parallelism);
          write("merge_trace.json", io::dump(io::trace_to_json(trimmed.trace, trimmed.graph)));
          s["merge_edges_removed"] = trimmed.trace.steps.size();
          final_graph = trimmed.graph;
        } else {
          final_graph = merged_graph;
        }
      }
      s.update(graph_stats(final_graph));
      summary.stages.push_back(s);
    });
  }

  stage("export", [&] {
    write("graph.json", io::dump(io::graph_to_json(final_graph)));
    write("graph.graphml", io::graph_to_graphml(final_graph));
    write("graph.dot", io::graph_to_dot(final_graph));
    nlohmann::json s = graph_stats(final_graph);
    s["stage"] = "export";
    summary.stages.push_back(s);
  });
  return summary;
}

}  // namespace clustergraph
