#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clustergraph/error.hpp"
#include "clustergraph/point_cloud.hpp"
#include "clustergraph/transport.hpp"

namespace clustergraph {

enum class ClusterMetricKind { min, max, avg, hausdorff, wasserstein };

/// Inter-cluster distance selection. `p` is only used by wasserstein.
struct ClusterMetricChoice {
  ClusterMetricKind kind = ClusterMetricKind::avg;
  double p = 1.0;

  /// Short name recorded in exported graphs, e.g. "avg" or "wasserstein(p=2)".
  std::string tag() const {
    switch (kind) {
      case ClusterMetricKind::min:
        return "min";
      case ClusterMetricKind::max:
        return "max";
      case ClusterMetricKind::avg:
        return "avg";
      case ClusterMetricKind::hausdorff:
        return "hausdorff";
      case ClusterMetricKind::wasserstein: {
        std::ostringstream out;
        out << "wasserstein(p=" << p << ")";
        return out.str();
      }
    }
    return "unknown";
  }

  static ClusterMetricChoice parse(std::string_view name, double p = 1.0) {
    ClusterMetricChoice choice;
    choice.p = p;
    if (name == "min") {
      choice.kind = ClusterMetricKind::min;
    } else if (name == "max") {
      choice.kind = ClusterMetricKind::max;
    } else if (name == "avg") {
      choice.kind = ClusterMetricKind::avg;
    } else if (name == "hausdorff") {
      choice.kind = ClusterMetricKind::hausdorff;
    } else if (name == "wasserstein") {
      choice.kind = ClusterMetricKind::wasserstein;
    } else {
      throw config_error("unknown cluster metric '" + std::string(name) +
                         "' (expected min, max, avg, hausdorff or wasserstein)");
    }
    choice.validate();
    return choice;
  }

  /// Inverse of tag().
  static ClusterMetricChoice from_tag(std::string_view tag) {
    constexpr std::string_view prefix = "wasserstein(p=";
    if (tag.substr(0, prefix.size()) == prefix && tag.size() > prefix.size() && tag.back() == ')') {
      const std::string number(tag.substr(prefix.size(), tag.size() - prefix.size() - 1));
      try {
        return parse("wasserstein", std::stod(number));
      } catch (const std::invalid_argument&) {
        throw config_error("malformed metric tag '" + std::string(tag) + "'");
      }
    }
    return parse(tag);
  }

  void validate() const {
    if (!std::isfinite(p) || p < 1.0) throw config_error("Wasserstein exponent p must be finite and >= 1");
  }
};

inline double point_distance(const PointCloud& cloud, PointId i, PointId j) { return cloud.distance(i, j); }

namespace detail {

inline void require_nonempty(std::span<const PointId> a, std::span<const PointId> b) {
  if (a.empty() || b.empty()) throw input_error("cluster distance requested for an empty cluster");
}

}  // namespace detail

/// Minimum, maximum or mean of d_X over the |a|*|b| ordered cross pairs. The mean is
/// summed in ascending (x, y) order when the spans are sorted.
inline double cluster_distance_extremal(const PointCloud& cloud, std::span<const PointId> a,
                                        std::span<const PointId> b, ClusterMetricKind kind) {
  detail::require_nonempty(a, b);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  double sum = 0.0;
  for (PointId x : a) {
    for (PointId y : b) {
      const double d = cloud.distance(x, y);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      sum += d;
    }
  }
  switch (kind) {
    case ClusterMetricKind::min:
      return lo;
    case ClusterMetricKind::max:
      return hi;
    case ClusterMetricKind::avg:
      return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    default:
      throw config_error("cluster_distance_extremal supports min, max and avg only");
  }
}

inline double cluster_distance_hausdorff(const PointCloud& cloud, std::span<const PointId> a,
                                         std::span<const PointId> b) {
  detail::require_nonempty(a, b);
  auto directed = [&](std::span<const PointId> from, std::span<const PointId> to) {
    double worst = 0.0;
    for (PointId x : from) {
      double nearest = std::numeric_limits<double>::infinity();
      for (PointId y : to) nearest = std::min(nearest, cloud.distance(x, y));
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

/// p-Wasserstein distance between the uniform distributions on a and b. Masses are
/// scaled to the integer grid lcm(|a|, |b|) and the transport problem is solved exactly.
inline double cluster_distance_wasserstein(const PointCloud& cloud, std::span<const PointId> a,
                                           std::span<const PointId> b, double p) {
  detail::require_nonempty(a, b);
  if (!std::isfinite(p) || p < 1.0) throw config_error("Wasserstein exponent p must be finite and >= 1");
  const auto na = static_cast<std::int64_t>(a.size());
  const auto nb = static_cast<std::int64_t>(b.size());
  const std::int64_t grid = std::lcm(na, nb);
  std::vector<std::int64_t> supply(a.size(), grid / na);
  std::vector<std::int64_t> demand(b.size(), grid / nb);
  auto cost = [&](std::size_t i, std::size_t j) {
    const double d = cloud.distance(a[i], b[j]);
    return p == 1.0 ? d : std::pow(d, p);
  };
  const double total = min_cost_transport(supply, demand, cost);
  const double mean = std::max(0.0, total / static_cast<double>(grid));
  return p == 1.0 ? mean : std::pow(mean, 1.0 / p);
}

inline double cluster_distance(const PointCloud& cloud, std::span<const PointId> a, std::span<const PointId> b,
                               const ClusterMetricChoice& choice) {
  switch (choice.kind) {
    case ClusterMetricKind::min:
    case ClusterMetricKind::max:
    case ClusterMetricKind::avg:
      return cluster_distance_extremal(cloud, a, b, choice.kind);
    case ClusterMetricKind::hausdorff:
      return cluster_distance_hausdorff(cloud, a, b);
    case ClusterMetricKind::wasserstein:
      return cluster_distance_wasserstein(cloud, a, b, choice.p);
  }
  throw internal_error("unhandled cluster metric");
}

}  // namespace clustergraph
