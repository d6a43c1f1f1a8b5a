#pragma once

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "clustergraph/clustering.hpp"
#include "clustergraph/distortion.hpp"
#include "clustergraph/error.hpp"
#include "clustergraph/model.hpp"
#include "clustergraph/point_cloud.hpp"
#include "clustergraph/pruning.hpp"
#include "clustergraph/stability.hpp"

namespace clustergraph::io {

using json = nlohmann::json;

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

inline std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::optional<double> parse_double(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE) return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_index(const std::string& cell) {
  if (cell.empty() || cell.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
  errno = 0;
  const unsigned long long v = std::strtoull(cell.c_str(), nullptr, 10);
  if (errno == ERANGE) return std::nullopt;
  return static_cast<std::size_t>(v);
}

/// Non-empty lines of a CSV file, split into trimmed cells.
inline std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot read '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_row(line));
  }
  return rows;
}

inline bool all_numeric(const std::vector<std::string>& row) {
  for (const auto& cell : row) {
    if (!parse_double(cell)) return false;
  }
  return true;
}

}  // namespace detail

struct PointLoadOptions {
  /// Read an N x N distance matrix instead of coordinates.
  bool distance_matrix = false;
  /// Header column holding class labels (coordinates mode).
  std::string label_column = "label";
  double minkowski = 2.0;
  /// Largest tolerated |d(i,j) - d(j,i)|; the two entries are averaged.
  double symmetry_tolerance = 1e-9;
};

/// Reads a point CSV (one row per point, optional header, optional label column) or a
/// distance-matrix CSV.
inline PointCloud load_points(const std::filesystem::path& path, const PointLoadOptions& options = {}) {
  auto rows = detail::read_rows(path);
  if (rows.empty()) throw input_error("'" + path.string() + "' has no rows");
  std::optional<std::vector<std::string>> header;
  if (!detail::all_numeric(rows.front())) {
    header = rows.front();
    rows.erase(rows.begin());
  }
  if (rows.empty()) throw input_error("'" + path.string() + "' has a header but no data");

  if (options.distance_matrix) {
    std::vector<std::vector<double>> matrix;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.size()) {
        throw input_error("distance matrix row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                          " cells, expected " + std::to_string(rows.size()));
      }
      std::vector<double> values;
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        const auto v = detail::parse_double(rows[r][c]);
        if (!v) throw input_error("non-numeric distance at row " + std::to_string(r) + ", column " + std::to_string(c));
        values.push_back(*v);
      }
      matrix.push_back(std::move(values));
    }
    const std::size_t n = matrix.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::abs(matrix[i][j] - matrix[j][i]) > options.symmetry_tolerance) {
          throw input_error("asymmetric distance matrix at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        }
        const double mean = 0.5 * (matrix[i][j] + matrix[j][i]);
        matrix[i][j] = matrix[j][i] = mean;
      }
    }
    return PointCloud::from_distance_matrix(matrix);
  }

  std::optional<std::size_t> label_at;
  if (header) {
    for (std::size_t c = 0; c < header->size(); ++c) {
      if ((*header)[c] == options.label_column) label_at = c;
    }
  }
  const std::size_t width = header ? header->size() : rows.front().size();
  std::vector<std::vector<double>> points;
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw input_error("ragged row " + std::to_string(r) + ": " + std::to_string(rows[r].size()) + " cells, expected " +
                        std::to_string(width));
    }
    std::vector<double> values;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_at && c == *label_at) {
        labels.push_back(rows[r][c]);
        continue;
      }
      const auto v = detail::parse_double(rows[r][c]);
      if (!v) throw input_error("non-numeric feature at row " + std::to_string(r) + ", column " + std::to_string(c));
      values.push_back(*v);
    }
    points.push_back(std::move(values));
  }
  return PointCloud::from_coordinates(points, std::move(labels), options.minkowski);
}

/// Reads `point_id,cluster_id` rows; repeated point ids make the result a division.
inline Clustering load_clustering(const std::filesystem::path& path, std::size_t point_count) {
  auto rows = detail::read_rows(path);
  if (!rows.empty() && !rows.front().empty() && !detail::parse_index(rows.front().front())) rows.erase(rows.begin());
  if (rows.empty()) throw input_error("clustering file '" + path.string() + "' is empty");
  std::map<std::string, std::vector<PointId>> clusters;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != 2) throw input_error("clustering row " + std::to_string(r) + " must have two cells");
    const auto id = detail::parse_index(rows[r][0]);
    if (!id) throw input_error("clustering row " + std::to_string(r) + ": invalid point id '" + rows[r][0] + "'");
    if (*id >= point_count) {
      throw input_error("clustering references unknown point " + std::to_string(*id) + " (N = " +
                        std::to_string(point_count) + ")");
    }
    if (rows[r][1].empty()) throw input_error("clustering row " + std::to_string(r) + " has an empty cluster id");
    clusters[rows[r][1]].push_back(*id);
  }
  return Clustering::infer(clusters);
}

inline std::string clustering_csv(const Clustering& clustering) {
  std::vector<std::pair<PointId, std::string>> rows;
  for (std::size_t c = 0; c < clustering.size(); ++c) {
    for (PointId p : clustering.members(c)) rows.emplace_back(p, clustering.id(c));
  }
  std::sort(rows.begin(), rows.end());
  std::string out = "point_id,cluster_id\n";
  for (const auto& [p, id] : rows) out += std::to_string(p) + "," + id + "\n";
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw input_error("failed writing '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---------------------------------------------------------------------------
// Graph JSON

inline json graph_to_json(const ClusterGraphModel& graph) {
  json nodes = json::array();
  for (const auto& v : graph.vertices()) {
    nodes.push_back({{"id", v.id},
                     {"size", v.size()},
                     {"component", v.component},
                     {"composition", v.composition},
                     {"members", v.members}});
  }
  json edges = json::array();
  for (const auto& [key, e] : graph.edges()) {
    json item = {{"source", graph.vertex(key.first).id},
                 {"target", graph.vertex(key.second).id},
                 {"weight", e.weight},
                 {"provenance", std::string(to_string(e.provenance))}};
    if (e.distortion) item["distortion"] = *e.distortion;
    edges.push_back(std::move(item));
  }
  json meta = {{"metric_tag", graph.metric_tag()}, {"k", graph.knn_k()}};
  if (graph.global_distortion()) meta["global_distortion"] = *graph.global_distortion();
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"meta", std::move(meta)}};
}

inline ClusterGraphModel graph_from_json(const json& doc) {
  try {
    std::vector<Vertex> vertices;
    for (const auto& node : doc.at("nodes")) {
      Vertex v;
      v.id = node.at("id").get<std::string>();
      v.members = node.at("members").get<std::vector<PointId>>();
      v.composition = node.at("composition").get<std::map<std::string, double>>();
      v.component = node.at("component").get<int>();
      if (v.members.size() != node.at("size").get<std::size_t>()) {
        throw input_error("node '" + v.id + "' size does not match its member list");
      }
      vertices.push_back(std::move(v));
    }
    std::sort(vertices.begin(), vertices.end(), [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    const json& meta = doc.at("meta");
    ClusterGraphModel graph(std::move(vertices), meta.at("metric_tag").get<std::string>(),
                            meta.at("k").get<std::size_t>());
    if (meta.contains("global_distortion")) graph.set_global_distortion(meta["global_distortion"].get<double>());
    for (const auto& item : doc.at("edges")) {
      const auto source = graph.index_of(item.at("source").get<std::string>());
      const auto target = graph.index_of(item.at("target").get<std::string>());
      if (!source || !target) throw input_error("edge references an unknown node");
      Edge e;
      e.weight = item.at("weight").get<double>();
      const auto provenance = item.at("provenance").get<std::string>();
      if (provenance == "original") {
        e.provenance = Provenance::original;
      } else if (provenance == "merge") {
        e.provenance = Provenance::merge;
      } else {
        throw input_error("unknown edge provenance '" + provenance + "'");
      }
      if (item.contains("distortion")) e.distortion = item["distortion"].get<double>();
      graph.add_edge(*source, *target, e);
    }
    validate(graph);
    return graph;
  } catch (const json::exception& ex) {
    throw input_error(std::string("malformed graph JSON: ") + ex.what());
  } catch (const Error& ex) {
    throw input_error(std::string("invalid graph JSON: ") + ex.what());
  }
}

inline std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Reports

inline json report_to_json(const DistortionReport& report, const ClusterGraphModel& graph) {
  json pairs = json::array();
  for (const auto& [key, score] : report.pair_scores) {
    pairs.push_back({{"source", graph.vertex(key.first).id},
                     {"target", graph.vertex(key.second).id},
                     {"delta", score.delta},
                     {"weight", score.weight},
                     {"pair_count", score.pair_count}});
  }
  json components = json::array();
  for (const auto& [c, value] : report.per_component) components.push_back({{"component", c}, {"distortion", value}});
  return {{"k", report.k_used},
          {"global", report.global},
          {"aggregation", report.aggregation},
          {"sampled", report.sampled},
          {"vertex_count", graph.vertex_count()},
          {"per_component", std::move(components)},
          {"pairs", std::move(pairs)}};
}

inline json trace_to_json(const PruneTrace& trace, const ClusterGraphModel& graph) {
  json steps = json::array();
  for (const auto& step : trace.steps) {
    json item = {{"source", graph.vertex(step.edge.first).id},
                 {"target", graph.vertex(step.edge.second).id},
                 {"criterion", step.criterion},
                 {"components", step.components}};
    if (step.step_ratio) item["step_ratio"] = *step.step_ratio;
    steps.push_back(std::move(item));
  }
  json doc = {{"strategy", trace.strategy}, {"stop_reason", std::string(to_string(trace.stop))}, {"steps", steps}};
  if (trace.initial_value) doc["initial_value"] = *trace.initial_value;
  return doc;
}

inline json stability_to_json(const StabilityReport& report) {
  return {{"delta", report.delta},
          {"delta_auto", report.delta_auto},
          {"clusters_checked", report.clusters_checked},
          {"worst_image_ratio", report.worst_image_ratio},
          {"worst_clique_ratio", report.worst_clique_ratio},
          {"violations", report.violations}};
}

// ---------------------------------------------------------------------------
// GraphML and DOT

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string dot_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

inline std::string number(double v) { return json(v).dump(); }

}  // namespace detail

inline std::string graph_to_graphml(const ClusterGraphModel& graph) {
  using detail::xml_escape;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" "
         "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
         "xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
         "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
      << "  <key id=\"metric_tag\" for=\"graph\" attr.name=\"metric_tag\" attr.type=\"string\"/>\n"
      << "  <key id=\"k\" for=\"graph\" attr.name=\"k\" attr.type=\"int\"/>\n"
      << "  <key id=\"global_distortion\" for=\"graph\" attr.name=\"global_distortion\" attr.type=\"double\"/>\n"
      << "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"int\"/>\n"
      << "  <key id=\"component\" for=\"node\" attr.name=\"component\" attr.type=\"int\"/>\n"
      << "  <key id=\"composition\" for=\"node\" attr.name=\"composition\" attr.type=\"string\"/>\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <key id=\"distortion\" for=\"edge\" attr.name=\"distortion\" attr.type=\"double\"/>\n"
      << "  <key id=\"provenance\" for=\"edge\" attr.name=\"provenance\" attr.type=\"string\"/>\n"
      << "  <graph id=\"ClusterGraph\" edgedefault=\"undirected\">\n"
      << "    <data key=\"metric_tag\">" << xml_escape(graph.metric_tag()) << "</data>\n"
      << "    <data key=\"k\">" << graph.knn_k() << "</data>\n";
  if (graph.global_distortion()) {
    out << "    <data key=\"global_distortion\">" << detail::number(*graph.global_distortion()) << "</data>\n";
  }
  for (const auto& v : graph.vertices()) {
    out << "    <node id=\"" << xml_escape(v.id) << "\">\n"
        << "      <data key=\"size\">" << v.size() << "</data>\n"
        << "      <data key=\"component\">" << v.component << "</data>\n"
        << "      <data key=\"composition\">" << xml_escape(json(v.composition).dump()) << "</data>\n"
        << "    </node>\n";
  }
  std::size_t count = 0;
  for (const auto& [key, e] : graph.edges()) {
    out << "    <edge id=\"e" << count++ << "\" source=\"" << xml_escape(graph.vertex(key.first).id) << "\" target=\""
        << xml_escape(graph.vertex(key.second).id) << "\">\n"
        << "      <data key=\"weight\">" << detail::number(e.weight) << "</data>\n";
    if (e.distortion) out << "      <data key=\"distortion\">" << detail::number(*e.distortion) << "</data>\n";
    out << "      <data key=\"provenance\">" << to_string(e.provenance) << "</data>\n"
        << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

/// Undirected DOT; edge weight is written as `len` so layout engines honor it.
inline std::string graph_to_dot(const ClusterGraphModel& graph) {
  using detail::dot_escape;
  std::ostringstream out;
  out << "graph ClusterGraph {\n";
  out << "  graph [metric_tag=\"" << dot_escape(graph.metric_tag()) << "\", k=" << graph.knn_k() << "];\n";
  for (const auto& v : graph.vertices()) {
    out << "  \"" << dot_escape(v.id) << "\" [label=\"" << dot_escape(v.id) << " (" << v.size()
        << ")\", size=" << v.size() << ", component=" << v.component << "];\n";
  }
  for (const auto& [key, e] : graph.edges()) {
    out << "  \"" << dot_escape(graph.vertex(key.first).id) << "\" -- \"" << dot_escape(graph.vertex(key.second).id)
        << "\" [len=" << detail::number(e.weight) << ", label=\"" << detail::number(e.weight) << "\"";
    if (e.distortion) out << ", distortion=" << detail::number(*e.distortion);
    if (e.provenance == Provenance::merge) out << ", style=dashed";
    out << ", provenance=\"" << to_string(e.provenance) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

enum class GraphFormat { json, graphml, dot };

inline GraphFormat parse_format(std::string_view name) {
  if (name == "json") return GraphFormat::json;
  if (name == "graphml") return GraphFormat::graphml;
  if (name == "dot") return GraphFormat::dot;
  throw config_error("unknown graph format '" + std::string(name) + "' (expected json, graphml or dot)");
}

/// Writes the graph; when a report is given its global distortion is recorded in the metadata.
inline void export_graph(const ClusterGraphModel& graph, const DistortionReport* report, GraphFormat format,
                         const std::filesystem::path& path) {
  ClusterGraphModel annotated = graph;
  if (report) annotated.set_global_distortion(report->global);
  switch (format) {
    case GraphFormat::json:
      write_text(path, dump(graph_to_json(annotated)));
      break;
    case GraphFormat::graphml:
      write_text(path, graph_to_graphml(annotated));
      break;
    case GraphFormat::dot:
      write_text(path, graph_to_dot(annotated));
      break;
  }
}

inline ClusterGraphModel load_graph(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::exception& ex) {
    throw input_error("'" + path.string() + "' is not valid JSON: " + ex.what());
  }
  return graph_from_json(doc);
}

}  // namespace clustergraph::io
