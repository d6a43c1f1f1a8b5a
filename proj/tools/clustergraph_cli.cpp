// Command-line front end: individual pipeline stages plus the full pipeline.
//
// Exit codes: 0 success, 1 input/validation error, 2 configuration error,
// 3 internal invariant violation.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "clustergraph/clustergraph.hpp"

namespace cg = clustergraph;
using nlohmann::json;

namespace {

struct PointsArgs {
  std::string path;
  bool distance_matrix = false;
  std::string label_column = "label";
  double minkowski = 2.0;

  void add_to(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--points", path, "Point CSV or distance-matrix CSV");
    if (required) opt->required();
    app->add_flag("--distance_matrix", distance_matrix, "Read --points as an N x N distance matrix");
    app->add_option("--label_column", label_column, "Header column holding class labels");
    app->add_option("--minkowski", minkowski, "Exponent of the point metric (coordinates mode)");
  }

  cg::PointCloud load() const {
    cg::io::PointLoadOptions options;
    options.distance_matrix = distance_matrix;
    options.label_column = label_column;
    options.minkowski = minkowski;
    return cg::io::load_points(path, options);
  }
};

void emit(const json& doc, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << cg::io::dump(doc);
  } else {
    cg::io::write_text(out, cg::io::dump(doc));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ClusterGraph: metric-faithful graph summaries of clustered data"};
  app.require_subcommand(1);
  unsigned threads = 0;
  bool json_summary = false;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
  app.add_flag("--json", json_summary, "Print a machine-readable summary to standard output");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Cluster points with k-means (optionally per class label)");
  PointsArgs cluster_points;
  cluster_points.add_to(cluster);
  std::size_t cluster_k = 20;
  std::size_t per_label_k = 0;
  std::uint64_t seed = 0;
  std::string cluster_out = "clustering.csv";
  cluster->add_option("--kmeans_k", cluster_k, "Number of clusters");
  cluster->add_option("--per_label_k", per_label_k, "Clusters per class label (enables per-label mode)");
  cluster->add_option("--seed", seed, "Random seed");
  cluster->add_option("--out", cluster_out, "Output clustering CSV");

  // build
  auto* build = app.add_subcommand("build", "Build the ClusterGraph of a clustering");
  PointsArgs build_points;
  build_points.add_to(build);
  std::string clustering_path;
  std::size_t knn_k = 10;
  std::string metric_name = "avg";
  double wasserstein_p = 1.0;
  std::string build_out = "graph.json";
  build->add_option("--clustering", clustering_path, "Clustering CSV (point_id,cluster_id)")->required();
  build->add_option("--knn_k", knn_k, "Neighbors in the geodesic k-nn graph");
  build->add_option("--metric", metric_name, "min | max | avg | hausdorff | wasserstein");
  build->add_option("--wasserstein_p", wasserstein_p, "Wasserstein exponent");
  build->add_option("--out", build_out, "Output graph JSON");

  // score
  auto* score = app.add_subcommand("score", "Metric distortion of a ClusterGraph");
  PointsArgs score_points;
  score_points.add_to(score);
  std::string score_graph;
  std::string score_out = "distortion.json";
  std::string score_graph_out;
  std::size_t max_pairs = 0;
  score->add_option("--graph", score_graph, "Graph JSON")->required();
  score->add_option("--max_pairs", max_pairs, "Cap on point pairs per cluster pair (0 = all)");
  score->add_option("--seed", seed, "Seed for pair subsampling");
  score->add_option("--out", score_out, "Output distortion report JSON");
  score->add_option("--graph_out", score_graph_out, "Write the graph annotated with edge distortions");

  // prune
  auto* prune = app.add_subcommand("prune", "Prune a ClusterGraph");
  PointsArgs prune_points;
  prune_points.add_to(prune, false);
  std::string prune_graph;
  std::string strategy = "greedy";
  double alpha = 0.0;
  std::size_t max_steps = 0;
  std::size_t budget = 0;
  double floor = 0.0;
  std::string prune_out = "graph_pruned.json";
  std::string prune_trace;
  prune->add_option("--graph", prune_graph, "Graph JSON")->required();
  prune->add_option("--prune", strategy, "threshold | greedy | connectivity");
  prune->add_option("--alpha", alpha, "Distortion threshold (threshold strategy)");
  prune->add_option("--max_steps", max_steps, "Greedy step budget (0 = unbounded)");
  prune->add_option("--connectivity_budget", budget, "Connectivity pruning edge budget (0 = none)");
  prune->add_option("--connectivity_floor", floor, "Stop when connectivity kept falls below this (0 = none)");
  prune->add_option("--max_pairs", max_pairs, "Cap on point pairs per cluster pair (greedy)");
  prune->add_option("--out", prune_out, "Output graph JSON");
  prune->add_option("--trace", prune_trace, "Output prune trace JSON");

  // merge
  auto* merge = app.add_subcommand("merge", "Merge components, then connectivity-prune the merge edges");
  PointsArgs merge_points;
  merge_points.add_to(merge);
  std::string merge_graph;
  std::size_t merge_k = 3;
  std::size_t merge_budget = 20;
  std::string merge_out = "graph_merged.json";
  std::string merge_trace;
  merge->add_option("--graph", merge_graph, "Graph JSON")->required();
  merge->add_option("--merge_k", merge_k, "Nearest vertices linked in other components");
  merge->add_option("--merge_budget", merge_budget, "Merge edges to prune afterwards (0 = none)");
  merge->add_option("--out", merge_out, "Output graph JSON");
  merge->add_option("--trace", merge_trace, "Output connectivity prune trace JSON");

  // export
  auto* exporter = app.add_subcommand("export", "Convert a graph JSON to json, graphml or dot");
  std::string export_graph;
  std::string format = "graphml";
  std::string export_out;
  std::string export_report;
  exporter->add_option("--graph", export_graph, "Graph JSON")->required();
  exporter->add_option("--format", format, "json | graphml | dot");
  exporter->add_option("--report", export_report, "Distortion report JSON (records global distortion)");
  exporter->add_option("--out", export_out, "Output path")->required();

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run the whole pipeline from a configuration file");
  std::string config_path;
  pipeline->add_option("--config", config_path, "Configuration file (key = value lines)");
  std::map<std::string, std::string> overrides;
  for (const auto& key : cg::PipelineConfig::keys()) {
    pipeline->add_option_function<std::string>(
        "--" + key, [&overrides, key](const std::string& value) { overrides[key] = value; },
        "Override configuration key '" + key + "'");
  }

  // stability
  auto* stability = app.add_subcommand("stability", "Check image-diameter bounds between two clusterings");
  PointsArgs stability_points;
  stability_points.add_to(stability);
  std::string first_path, second_path;
  std::optional<double> delta;
  stability->add_option("--first", first_path, "First clustering CSV")->required();
  stability->add_option("--second", second_path, "Second clustering CSV")->required();
  stability->add_option("--delta", delta, "Diameter bound (default: largest cluster diameter)");
  std::string stability_out;
  stability->add_option("--out", stability_out, "Output report JSON (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const cg::Parallelism parallelism{threads};
  try {
    if (*cluster) {
      const auto cloud = cluster_points.load();
      cg::Clustering result;
      if (per_label_k > 0) {
        std::vector<std::string> labels;
        for (cg::PointId p = 0; p < cloud.size(); ++p) {
          labels.emplace_back(cloud.has_labels() ? std::string(cloud.label(p)) : "");
        }
        result = cg::per_label_clustering(cloud, labels, per_label_k, seed);
      } else {
        result = cg::kmeans(cloud, cluster_k, seed);
      }
      cg::io::write_text(cluster_out, cg::io::clustering_csv(result));
      if (json_summary) std::cout << json{{"clusters", result.size()}, {"out", cluster_out}}.dump() << "\n";
    } else if (*build) {
      const auto cloud = build_points.load();
      const auto clustering = cg::io::load_clustering(clustering_path, cloud.size());
      const auto index = cg::build_knn_graph(cloud, knn_k);
      const auto metric = cg::ClusterMetricChoice::parse(metric_name, wasserstein_p);
      const auto graph = cg::build_cluster_graph(cloud, clustering, index, metric, parallelism);
      cg::io::write_text(build_out, cg::io::dump(cg::io::graph_to_json(graph)));
      std::cerr << "built " << graph.vertex_count() << " vertices, " << graph.edge_count() << " edges, "
                << index.component_count() << " k-nn components\n";
      if (json_summary) {
        std::cout << json{{"vertices", graph.vertex_count()}, {"edges", graph.edge_count()},
                          {"components", index.component_count()}}.dump()
                  << "\n";
      }
    } else if (*score) {
      const auto cloud = score_points.load();
      const auto graph = cg::io::load_graph(score_graph);
      const auto clustering = graph.clustering();
      const auto index = cg::build_knn_graph(cloud, graph.knn_k());
      cg::ScoringOptions options;
      options.max_pairs = max_pairs;
      options.seed = seed;
      options.parallelism = parallelism;
      const auto report = cg::global_distortion(graph, clustering, index, options);
      emit(cg::io::report_to_json(report, graph), score_out);
      if (!score_graph_out.empty()) {
        cg::io::write_text(score_graph_out, cg::io::dump(cg::io::graph_to_json(cg::annotate_distortion(graph, report))));
      }
      std::cerr << "global distortion " << report.global << " over " << graph.vertex_count() << " vertices\n";
      if (json_summary) std::cout << json{{"global_distortion", report.global}}.dump() << "\n";
    } else if (*prune) {
      const auto graph = cg::io::load_graph(prune_graph);
      std::optional<cg::PruneResult> result;
      if (strategy == "threshold") {
        result = cg::threshold_prune(graph, alpha);
      } else if (strategy == "greedy") {
        if (prune_points.path.empty()) throw cg::config_error("greedy pruning needs --points");
        const auto cloud = prune_points.load();
        const auto index = cg::build_knn_graph(cloud, graph.knn_k());
        cg::GreedyOptions options;
        if (max_steps > 0) options.max_steps = max_steps;
        options.scoring.max_pairs = max_pairs;
        options.scoring.seed = seed;
        options.parallelism = parallelism;
        result = cg::greedy_prune(graph, graph.clustering(), index, options);
      } else if (strategy == "connectivity") {
        cg::ConnectivityStop stop;
        if (budget > 0) stop.budget = budget;
        if (floor > 0.0) stop.floor = floor;
        result = cg::connectivity_prune(graph, std::nullopt, stop, parallelism);
      } else {
        throw cg::config_error("unknown prune strategy '" + strategy + "'");
      }
      cg::io::write_text(prune_out, cg::io::dump(cg::io::graph_to_json(result->graph)));
      if (!prune_trace.empty()) {
        cg::io::write_text(prune_trace, cg::io::dump(cg::io::trace_to_json(result->trace, result->graph)));
      }
      std::cerr << "removed " << result->trace.steps.size() << " edges (" << cg::to_string(result->trace.stop)
                << ")\n";
      if (json_summary) {
        std::cout << json{{"removed", result->trace.steps.size()},
                          {"stop_reason", std::string(cg::to_string(result->trace.stop))},
                          {"edges", result->graph.edge_count()}}.dump()
                  << "\n";
      }
    } else if (*merge) {
      const auto cloud = merge_points.load();
      const auto graph = cg::io::load_graph(merge_graph);
      const auto metric = cg::ClusterMetricChoice::from_tag(graph.metric_tag());
      auto merged = cg::merge_components(graph, cloud, metric, merge_k, parallelism);
      if (!merged.performed) std::cerr << "warning: graph has a single component; nothing to merge\n";
      cg::ClusterGraphModel out = merged.graph;
      std::size_t removed = 0;
      if (merged.performed && merge_budget > 0) {
        cg::ConnectivityStop stop;
        stop.budget = merge_budget;
        auto trimmed = cg::connectivity_prune(out, cg::edges_with(out, cg::Provenance::merge), stop, parallelism);
        if (!merge_trace.empty()) {
          cg::io::write_text(merge_trace, cg::io::dump(cg::io::trace_to_json(trimmed.trace, trimmed.graph)));
        }
        removed = trimmed.trace.steps.size();
        out = trimmed.graph;
      }
      cg::io::write_text(merge_out, cg::io::dump(cg::io::graph_to_json(out)));
      if (json_summary) {
        std::cout << json{{"merge_edges", merged.added.size()}, {"removed", removed}, {"edges", out.edge_count()}}.dump()
                  << "\n";
      }
    } else if (*exporter) {
      const auto graph = cg::io::load_graph(export_graph);
      std::optional<cg::DistortionReport> report;
      if (!export_report.empty()) {
        const json doc = json::parse(cg::io::read_text(export_report));
        report.emplace();
        report->global = doc.at("global").get<double>();
      }
      cg::io::export_graph(graph, report ? &*report : nullptr, cg::io::parse_format(format), export_out);
    } else if (*pipeline) {
      cg::PipelineConfig config;
      if (!config_path.empty()) config = cg::PipelineConfig::load(config_path);
      for (const auto& [key, value] : overrides) config.set(key, value);
      if (threads != 0 && !overrides.count("threads")) config.threads = threads;
      const auto summary = cg::run_pipeline(config, std::cerr);
      if (json_summary) std::cout << summary.to_json(true).dump(2) << "\n";
    } else if (*stability) {
      const auto cloud = stability_points.load();
      const auto first = cg::io::load_clustering(first_path, cloud.size());
      const auto second = cg::io::load_clustering(second_path, cloud.size());
      const auto report = cg::check_stability(cloud, first, second, delta, parallelism);
      emit(cg::io::stability_to_json(report), stability_out);
      if (report.violations > 0) {
        std::cerr << report.violations << " bound violations\n";
        return 3;
      }
    }
  } catch (const cg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cg::exit_code(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
