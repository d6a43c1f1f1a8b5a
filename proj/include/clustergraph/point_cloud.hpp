#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clustergraph/error.hpp"

namespace clustergraph {

using PointId = std::size_t;

/// Label reported for points that carry no class label.
inline constexpr std::string_view kUnlabeled = "unlabeled";

/// A finite metric space: either N points with d real coordinates, or an N x N
/// distance matrix. Every consumer reads distances through distance() so the two
/// modes are interchangeable. Instances are immutable and validated on construction.
class PointCloud {
 public:
  enum class Mode { coordinates, distance_matrix };

  /// Builds a coordinate cloud. `labels` is either empty or has one entry per row;
  /// empty strings mean "no label". `minkowski` is the exponent of the point metric.
  static PointCloud from_coordinates(const std::vector<std::vector<double>>& rows,
                                     std::vector<std::string> labels = {}, double minkowski = 2.0) {
    PointCloud cloud;
    cloud.mode_ = Mode::coordinates;
    cloud.size_ = rows.size();
    cloud.minkowski_ = minkowski;
    if (!(minkowski >= 1.0) || !std::isfinite(minkowski)) {
      throw config_error("Minkowski exponent must be finite and >= 1");
    }
    if (rows.empty()) throw input_error("point cloud is empty");
    cloud.dimension_ = rows.front().size();
    if (cloud.dimension_ == 0) throw input_error("points must have dimension >= 1");
    cloud.values_.reserve(cloud.size_ * cloud.dimension_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cloud.dimension_) {
        throw input_error("dimension mismatch at point " + std::to_string(i) + ": expected " +
                          std::to_string(cloud.dimension_) + ", got " +
                          std::to_string(rows[i].size()));
      }
      for (double v : rows[i]) {
        if (!std::isfinite(v)) {
          throw input_error("non-finite coordinate at point " + std::to_string(i));
        }
        cloud.values_.push_back(v);
      }
    }
    cloud.set_labels(std::move(labels));
    return cloud;
  }

  /// Builds a matrix cloud. The matrix must be square, finite, symmetric,
  /// nonnegative and have a zero diagonal.
  static PointCloud from_distance_matrix(const std::vector<std::vector<double>>& matrix,
                                         std::vector<std::string> labels = {}) {
    PointCloud cloud;
    cloud.mode_ = Mode::distance_matrix;
    cloud.size_ = matrix.size();
    if (matrix.empty()) throw input_error("distance matrix is empty");
    cloud.values_.reserve(cloud.size_ * cloud.size_);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      if (matrix[i].size() != cloud.size_) {
        throw input_error("distance matrix is not square at row " + std::to_string(i));
      }
      for (double v : matrix[i]) cloud.values_.push_back(v);
    }
    const std::size_t n = cloud.size_;
    for (std::size_t i = 0; i < n; ++i) {
      if (cloud.values_[i * n + i] != 0.0) {
        throw input_error("distance matrix diagonal entry " + std::to_string(i) + " is not zero");
      }
      for (std::size_t j = 0; j < n; ++j) {
        const double v = cloud.values_[i * n + j];
        if (!std::isfinite(v)) throw input_error("non-finite distance at (" + pair_text(i, j) + ")");
        if (v < 0.0) throw input_error("negative distance at (" + pair_text(i, j) + ")");
        if (v != cloud.values_[j * n + i]) {
          throw input_error("asymmetric distance matrix at (" + pair_text(i, j) + ")");
        }
      }
    }
    cloud.set_labels(std::move(labels));
    return cloud;
  }

  Mode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return size_; }
  /// Feature dimension; 0 in matrix mode.
  std::size_t dimension() const noexcept { return dimension_; }
  double minkowski_exponent() const noexcept { return minkowski_; }

  std::span<const double> coordinates(PointId i) const {
    if (mode_ != Mode::coordinates) throw config_error("point cloud has no coordinates (matrix mode)");
    check(i);
    return {values_.data() + i * dimension_, dimension_};
  }

  double distance(PointId i, PointId j) const {
    check(i);
    check(j);
    if (mode_ == Mode::distance_matrix) return values_[i * size_ + j];
    if (i == j) return 0.0;
    const double* a = values_.data() + i * dimension_;
    const double* b = values_.data() + j * dimension_;
    double acc = 0.0;
    if (minkowski_ == 2.0) {
      for (std::size_t t = 0; t < dimension_; ++t) acc += (a[t] - b[t]) * (a[t] - b[t]);
      return std::sqrt(acc);
    }
    if (minkowski_ == 1.0) {
      for (std::size_t t = 0; t < dimension_; ++t) acc += std::abs(a[t] - b[t]);
      return acc;
    }
    for (std::size_t t = 0; t < dimension_; ++t) acc += std::pow(std::abs(a[t] - b[t]), minkowski_);
    return std::pow(acc, 1.0 / minkowski_);
  }

  bool has_labels() const noexcept { return !labels_.empty(); }

  /// Class label of point i, or "unlabeled".
  std::string_view label(PointId i) const {
    check(i);
    if (labels_.empty() || labels_[i].empty()) return kUnlabeled;
    return labels_[i];
  }

  void check(PointId i) const {
    if (i >= size_) {
      throw input_error("point id " + std::to_string(i) + " out of range (N = " +
                        std::to_string(size_) + ")");
    }
  }

 private:
  PointCloud() = default;

  static std::string pair_text(std::size_t i, std::size_t j) {
    return std::to_string(i) + ", " + std::to_string(j);
  }

  void set_labels(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != size_) {
      throw input_error("label count " + std::to_string(labels.size()) +
                        " does not match point count " + std::to_string(size_));
    }
    labels_ = std::move(labels);
  }

  Mode mode_ = Mode::coordinates;
  std::size_t size_ = 0;
  std::size_t dimension_ = 0;
  double minkowski_ = 2.0;
  std::vector<double> values_;
  std::vector<std::string> labels_;
};

}  // namespace clustergraph
