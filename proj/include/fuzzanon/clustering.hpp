#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzanon/data_model.hpp"

namespace fuzzanon {

/// Row-major n x d matrix of standardized features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                std::vector<std::string> names = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::string> names_;
};

/// One dendrogram merge. Leaves are 0..n-1; the i-th merge creates node n+i.
struct MergeStep {
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t merged = 0;
  double cost = 0;  // increase of within-cluster sum of squares

  friend bool operator==(const MergeStep&, const MergeStep&) = default;
};

class ClusterAssignment {
 public:
  ClusterAssignment() = default;
  /// Labels are 1-based; throws DataError unless they form a partition into exactly k non-empty clusters.
  ClusterAssignment(std::size_t k, std::vector<std::size_t> labels);

  std::size_t k() const { return k_; }
  std::size_t record_count() const { return labels_.size(); }
  std::size_t label(std::size_t record) const { return labels_[record]; }
  const std::vector<std::size_t>& labels() const { return labels_; }
  /// sizes()[c - 1] is the size of cluster c.
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::vector<std::size_t> members(std::size_t cluster) const;

  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::size_t> labels_;
  std::vector<std::size_t> sizes_;
};

/// Numeric sensitive + quasi attributes of the schema, in column order.
std::vector<std::string> default_feature_selection(const Schema& schema);

/// Z-scores each selected column with the population standard deviation.
/// Missing cells become the column mean (z = 0); constant columns become all zeros.
FeatureMatrix feature_matrix(const DataTable& table, const std::vector<std::string>& selection = {});

struct WardResult {
  ClusterAssignment assignment;
  std::vector<MergeStep> merges;
};

/// Full Ward dendrogram via the nearest-neighbor chain, sorted by merge cost.
/// Memory stays O(n*d): distances are evaluated from cluster centroids on demand.
std::vector<MergeStep> ward_dendrogram(const FeatureMatrix& features);

WardResult ward_cluster(const FeatureMatrix& features, std::size_t k);

/// Applies the first n-k merges. Clusters are numbered 1..k by their smallest member record.
ClusterAssignment cut_dendrogram(std::span<const MergeStep> merges, std::size_t n, std::size_t k);

nlohmann::json dendrogram_to_json(std::span<const MergeStep> merges);

}  // namespace fuzzanon
