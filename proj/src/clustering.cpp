#include "fuzzanon/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fuzzanon/error.hpp"

namespace fuzzanon {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                             std::vector<std::string> names)
    : rows_(rows), cols_(cols), values_(std::move(values)), names_(std::move(names)) {
  if (values_.size() != rows_ * cols_) throw DataError("feature matrix size does not match its shape");
  for (double v : values_) {
    if (std::isnan(v)) throw DataError("feature matrix contains NaN");
  }
}

ClusterAssignment::ClusterAssignment(std::size_t k, std::vector<std::size_t> labels)
    : k_(k), labels_(std::move(labels)), sizes_(k, 0) {
  for (std::size_t l : labels_) {
    if (l < 1 || l > k_) throw DataError("cluster label " + std::to_string(l) + " outside 1.." + std::to_string(k_));
    ++sizes_[l - 1];
  }
  for (std::size_t c = 0; c < k_; ++c) {
    if (sizes_[c] == 0) throw DataError("cluster " + std::to_string(c + 1) + " is empty");
  }
}

std::vector<std::size_t> ClusterAssignment::members(std::size_t cluster) const {
  std::vector<std::size_t> out;
  out.reserve(cluster >= 1 && cluster <= k_ ? sizes_[cluster - 1] : 0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == cluster) out.push_back(i);
  }
  return out;
}

std::vector<std::string> default_feature_selection(const Schema& schema) {
  std::vector<std::string> out;
  for (const auto& a : schema.attributes()) {
    if (a.kind == AttributeKind::Numeric && is_monitored(a.role)) out.push_back(a.name);
  }
  return out;
}

FeatureMatrix feature_matrix(const DataTable& table, const std::vector<std::string>& selection) {
  std::vector<std::string> names = selection.empty() ? default_feature_selection(table.schema()) : selection;
  if (names.empty()) throw DataError("no numeric attributes available for clustering");

  const std::size_t n = table.row_count();
  const std::size_t d = names.size();
  std::vector<double> values(n * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t col = table.schema().index_of(names[j]);
    if (table.schema()[col].kind != AttributeKind::Numeric) {
      throw DataError("clustering feature '" + names[j] + "' is not numeric");
    }
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const CellValue& v = table.at(i, col);
      if (v.is_numeric()) {
        sum += v.as_numeric();
        ++count;
      }
    }
    if (count == 0) continue;
    const double mean = sum / static_cast<double>(count);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const CellValue& v = table.at(i, col);
      if (v.is_numeric()) ss += (v.as_numeric() - mean) * (v.as_numeric() - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(count));
    if (!(sd > 0)) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const CellValue& v = table.at(i, col);
      values[i * d + j] = v.is_numeric() ? (v.as_numeric() - mean) / sd : 0.0;
    }
  }
  return FeatureMatrix(n, d, std::move(values), std::move(names));
}

namespace {

// Active clusters stored as centroids; slot i initially holds record i.
class WardChain {
 public:
  explicit WardChain(const FeatureMatrix& f)
      : n_(f.rows()), d_(f.cols()), centroid_(f.values()), size_(n_, 1.0), node_(n_), pos_(n_) {
    std::iota(node_.begin(), node_.end(), std::size_t{0});
    active_.resize(n_);
    std::iota(active_.begin(), active_.end(), std::size_t{0});
    std::iota(pos_.begin(), pos_.end(), std::size_t{0});
  }

  // Symmetric in (a, b) bit-for-bit, which the chain's reciprocity test relies on.
  double distance(std::size_t a, std::size_t b) const {
    const double* ca = &centroid_[a * d_];
    const double* cb = &centroid_[b * d_];
    double sq = 0;
    for (std::size_t j = 0; j < d_; ++j) {
      const double diff = ca[j] - cb[j];
      sq += diff * diff;
    }
    return (size_[a] * size_[b]) / (size_[a] + size_[b]) * sq;
  }

  std::size_t nearest(std::size_t a, std::optional<std::size_t> prev, double& best_out) const {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_slot = a;
    for (std::size_t slot : active_) {
      if (slot == a) continue;
      const double dist = distance(a, slot);
      if (dist < best || (dist == best && node_[slot] < node_[best_slot])) {
        best = dist;
        best_slot = slot;
      }
    }
    if (prev && distance(a, *prev) <= best) {
      best = distance(a, *prev);
      best_slot = *prev;
    }
    best_out = best;
    return best_slot;
  }

  std::vector<MergeStep> run() {
    std::vector<MergeStep> merges;
    merges.reserve(n_ ? n_ - 1 : 0);
    std::vector<std::size_t> chain;
    chain.reserve(n_);
    while (active_.size() > 1) {
      if (chain.empty()) chain.push_back(*std::min_element(active_.begin(), active_.end()));
      std::size_t a = 0;
      std::size_t b = 0;
      double cost = 0;
      for (;;) {
        a = chain.back();
        std::optional<std::size_t> prev;
        if (chain.size() >= 2) prev = chain[chain.size() - 2];
        b = nearest(a, prev, cost);
        if (prev && b == *prev) break;
        chain.push_back(b);
      }
      chain.pop_back();
      chain.pop_back();
      merges.push_back(merge(a, b, cost));
    }
    return merges;
  }

 private:
  MergeStep merge(std::size_t a, std::size_t b, double cost) {
    MergeStep step{std::min(node_[a], node_[b]), std::max(node_[a], node_[b]), n_ + merged_count_++, cost};
    const std::size_t keep = std::min(a, b);
    const std::size_t drop = std::max(a, b);
    const double sk = size_[keep];
    const double sd = size_[drop];
    for (std::size_t j = 0; j < d_; ++j) {
      centroid_[keep * d_ + j] = (sk * centroid_[keep * d_ + j] + sd * centroid_[drop * d_ + j]) / (sk + sd);
    }
    size_[keep] = sk + sd;
    node_[keep] = step.merged;
    const std::size_t p = pos_[drop];
    active_[p] = active_.back();
    pos_[active_[p]] = p;
    active_.pop_back();
    return step;
  }

  std::size_t n_;
  std::size_t d_;
  std::vector<double> centroid_;
  std::vector<double> size_;
  std::vector<std::size_t> node_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> pos_;
  std::size_t merged_count_ = 0;
};

}  // namespace

std::vector<MergeStep> ward_dendrogram(const FeatureMatrix& features) {
  const std::size_t n = features.rows();
  if (n == 0 || features.cols() == 0) throw DataError("empty feature matrix");
  auto merges = WardChain(features).run();

  // Rounding can leave a parent a hair cheaper than its child; lift it so sorting keeps children first.
  for (auto& m : merges) {
    if (m.left >= n) m.cost = std::max(m.cost, merges[m.left - n].cost);
    if (m.right >= n) m.cost = std::max(m.cost, merges[m.right - n].cost);
  }

  std::vector<std::size_t> order(merges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return merges[x].cost < merges[y].cost; });

  std::vector<std::size_t> renumber(merges.size());
  for (std::size_t i = 0; i < order.size(); ++i) renumber[order[i]] = n + i;
  auto relabel = [&](std::size_t id) { return id < n ? id : renumber[id - n]; };

  std::vector<MergeStep> sorted;
  sorted.reserve(merges.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const MergeStep& m = merges[order[i]];
    const std::size_t l = relabel(m.left);
    const std::size_t r = relabel(m.right);
    sorted.push_back({std::min(l, r), std::max(l, r), n + i, m.cost});
  }
  return sorted;
}

WardResult ward_cluster(const FeatureMatrix& features, std::size_t k) {
  const std::size_t n = features.rows();
  if (n == 0) throw DataError("empty feature matrix");
  if (k < 1 || k > n) {
    throw DataError("cluster count k=" + std::to_string(k) + " outside 1.." + std::to_string(n));
  }
  WardResult result;
  result.merges = ward_dendrogram(features);
  result.assignment = cut_dendrogram(result.merges, n, k);
  return result;
}

ClusterAssignment cut_dendrogram(std::span<const MergeStep> merges, std::size_t n, std::size_t k) {
  if (n == 0) throw DataError("cannot cut a dendrogram over zero records");
  if (k < 1 || k > n) {
    throw DataError("cluster count k=" + std::to_string(k) + " outside 1.." + std::to_string(n));
  }
  if (merges.size() != n - 1) {
    throw DataError("malformed merge history: expected " + std::to_string(n - 1) + " steps, got " +
                    std::to_string(merges.size()));
  }
  std::vector<bool> consumed(2 * n - 1, false);
  for (std::size_t i = 0; i < merges.size(); ++i) {
    const MergeStep& m = merges[i];
    const std::size_t limit = n + i;
    if (m.merged != limit || m.left >= limit || m.right >= limit || m.left == m.right || consumed[m.left] ||
        consumed[m.right]) {
      throw DataError("malformed merge history at step " + std::to_string(i));
    }
    consumed[m.left] = consumed[m.right] = true;
  }

  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t i = 0; i + k < n; ++i) {
    parent[merges[i].left] = merges[i].merged;
    parent[merges[i].right] = merges[i].merged;
  }
  auto root = [&](std::size_t x) {
    std::size_t r = x;
    while (parent[r] != r) r = parent[r];
    while (parent[x] != r) {
      const std::size_t next = parent[x];
      parent[x] = r;
      x = next;
    }
    return r;
  };

  std::vector<std::size_t> label_of_root(2 * n - 1, 0);
  std::vector<std::size_t> labels(n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = root(i);
    if (label_of_root[r] == 0) label_of_root[r] = ++next;
    labels[i] = label_of_root[r];
  }
  return ClusterAssignment(k, std::move(labels));
}

nlohmann::json dendrogram_to_json(std::span<const MergeStep> merges) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : merges) {
    out.push_back({{"left", m.left}, {"right", m.right}, {"merged", m.merged}, {"cost", m.cost}});
  }
  return out;
}

}  // namespace fuzzanon
