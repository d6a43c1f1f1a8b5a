#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clustergraph/error.hpp"
#include "clustergraph/point_cloud.hpp"

namespace clustergraph {

/// A cover of point ids by named clusters. Cluster ids are opaque strings and the
/// cluster index order is their lexicographic order. Members are kept sorted.
class Clustering {
 public:
  enum class Kind { partition, division };

  Clustering() = default;

  /// Throws on empty clusters, or on overlapping clusters when kind is partition.
  Clustering(const std::map<std::string, std::vector<PointId>>& clusters, Kind kind) : kind_(kind) {
    ids_.reserve(clusters.size());
    members_.reserve(clusters.size());
    for (const auto& [id, points] : clusters) {
      std::vector<PointId> sorted = points;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      if (sorted.empty()) throw input_error("cluster '" + id + "' is empty");
      ids_.push_back(id);
      members_.push_back(std::move(sorted));
    }
    if (kind_ == Kind::partition) {
      std::vector<std::pair<PointId, std::size_t>> owner;
      for (std::size_t c = 0; c < members_.size(); ++c) {
        for (PointId p : members_[c]) owner.emplace_back(p, c);
      }
      std::sort(owner.begin(), owner.end());
      for (std::size_t t = 1; t < owner.size(); ++t) {
        if (owner[t].first == owner[t - 1].first) {
          throw input_error("overlap under partition kind: point " + std::to_string(owner[t].first) +
                            " is in clusters '" + ids_[owner[t - 1].second] + "' and '" +
                            ids_[owner[t].second] + "'");
        }
      }
    }
  }

  /// Partition when no point appears twice, division otherwise.
  static Clustering infer(const std::map<std::string, std::vector<PointId>>& clusters) {
    std::vector<PointId> all;
    for (const auto& [id, points] : clusters) {
      std::vector<PointId> sorted = points;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      all.insert(all.end(), sorted.begin(), sorted.end());
    }
    std::sort(all.begin(), all.end());
    const bool overlap = std::adjacent_find(all.begin(), all.end()) != all.end();
    return Clustering(clusters, overlap ? Kind::division : Kind::partition);
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& id(std::size_t index) const { return ids_.at(index); }
  std::span<const PointId> members(std::size_t index) const { return members_.at(index); }

  std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - ids_.begin());
  }

  /// For every point id < point_count, the (sorted) indices of clusters containing it.
  std::vector<std::vector<std::size_t>> membership(std::size_t point_count) const {
    std::vector<std::vector<std::size_t>> out(point_count);
    for (std::size_t c = 0; c < members_.size(); ++c) {
      for (PointId p : members_[c]) {
        if (p < point_count) out[p].push_back(c);
      }
    }
    return out;
  }

  std::map<std::string, std::vector<PointId>> as_map() const {
    std::map<std::string, std::vector<PointId>> out;
    for (std::size_t c = 0; c < ids_.size(); ++c) out.emplace(ids_[c], members_[c]);
    return out;
  }

 private:
  Kind kind_ = Kind::partition;
  std::vector<std::string> ids_;
  std::vector<std::vector<PointId>> members_;
};

inline std::string_view to_string(Clustering::Kind kind) {
  return kind == Clustering::Kind::partition ? "partition" : "division";
}

/// Checks that the clustering is a cover of exactly the cloud's point ids.
/// Cloud and clustering invariants are enforced by their constructors.
inline void validate(const PointCloud& cloud, const Clustering& clustering) {
  if (clustering.size() == 0) throw input_error("clustering has no clusters");
  std::vector<bool> covered(cloud.size(), false);
  for (std::size_t c = 0; c < clustering.size(); ++c) {
    for (PointId p : clustering.members(c)) {
      if (p >= cloud.size()) {
        throw input_error("cluster '" + clustering.id(c) + "' references point " + std::to_string(p) +
                          " out of range (N = " + std::to_string(cloud.size()) + ")");
      }
      covered[p] = true;
    }
  }
  for (std::size_t p = 0; p < covered.size(); ++p) {
    if (!covered[p]) throw input_error("point " + std::to_string(p) + " is not covered by any cluster");
  }
}

}  // namespace clustergraph
