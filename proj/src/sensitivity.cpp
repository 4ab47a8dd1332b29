#include "fuzzanon/sensitivity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "fuzzanon/error.hpp"

namespace fuzzanon {

std::string BinRule::to_string() const { return fixed ? std::to_string(*fixed) : "sturges"; }

BinRule BinRule::parse(std::string_view s) {
  if (s == "sturges") return sturges();
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc{} || ptr != s.data() + s.size() || n == 0) {
    throw DataError("bin rule must be 'sturges' or a positive integer, got '" + std::string(s) + "'");
  }
  return fixed_count(n);
}

BinSpec::BinSpec(std::vector<Bin> bins) : bins_(std::move(bins)) {
  if (bins_.empty()) throw DataError("bin specification needs at least one bin");
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    if (bins_[i].ucl < bins_[i].lcl) throw DataError("bin with upper limit below lower limit");
    if (i > 0 && bins_[i].lcl != bins_[i - 1].ucl) throw DataError("bins are not contiguous");
  }
}

std::optional<std::size_t> BinSpec::locate(double v) const {
  if (v < bins_.front().lcl || v > bins_.back().ucl) return std::nullopt;
  auto it = std::upper_bound(bins_.begin(), bins_.end(), v, [](double x, const Bin& b) { return x < b.lcl; });
  return static_cast<std::size_t>(it - bins_.begin()) - 1;
}

std::size_t sturges_bin_count(std::size_t n) {
  if (n <= 1) return 1;
  return static_cast<std::size_t>(std::ceil(1.0 + std::log2(static_cast<double>(n))));
}

BinSpec bin_numeric(std::span<const double> values, const BinRule& rule) {
  if (values.empty()) throw DataError("cannot bin an empty value list");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return BinSpec({{lo, hi}});

  const std::size_t count = rule.fixed ? *rule.fixed : sturges_bin_count(values.size());
  const double width = (hi - lo) / static_cast<double>(count);
  std::vector<Bin> bins(count);
  for (std::size_t i = 0; i < count; ++i) bins[i].lcl = i == 0 ? lo : lo + width * static_cast<double>(i);
  for (std::size_t i = 0; i + 1 < count; ++i) bins[i].ucl = bins[i + 1].lcl;
  bins.back().ucl = hi;
  return BinSpec(std::move(bins));
}

std::optional<double> FrequencyDistribution::probability_of(const CellValue& v) const {
  if (kind == AttributeKind::Numeric) {
    if (!v.is_numeric() || !bins) return std::nullopt;
    auto idx = bins->locate(v.as_numeric());
    if (!idx) return std::nullopt;
    return entries[*idx].probability;
  }
  if (!v.is_text()) return std::nullopt;
  auto it = std::lower_bound(entries.begin(), entries.end(), v.as_text(), [](const ClassEntry& e, const std::string& s) {
    return std::get<std::string>(e.label) < s;
  });
  if (it == entries.end() || std::get<std::string>(it->label) != v.as_text()) return std::nullopt;
  return it->probability;
}

namespace {

std::size_t numeric_column(const DataTable& table, std::string_view attr) {
  const std::size_t col = table.schema().index_of(attr);
  if (table.schema()[col].kind != AttributeKind::Numeric) {
    throw DataError("attribute '" + std::string(attr) + "' is not numeric");
  }
  return col;
}

std::vector<std::size_t> cluster_members(const ClusterAssignment& assignment, std::size_t cluster) {
  if (cluster < 1 || cluster > assignment.k()) throw DataError("unknown cluster " + std::to_string(cluster));
  auto members = assignment.members(cluster);
  if (members.empty()) throw DataError("cluster " + std::to_string(cluster) + " is empty");
  return members;
}

std::vector<double> cluster_values(const DataTable& table, std::size_t col, const std::vector<std::size_t>& members) {
  std::vector<double> out;
  out.reserve(members.size());
  for (std::size_t r : members) {
    if (table.at(r, col).is_numeric()) out.push_back(table.at(r, col).as_numeric());
  }
  return out;
}

}  // namespace

FrequencyDistribution class_probabilities(const DataTable& table, const ClusterAssignment& assignment,
                                          std::size_t cluster, std::string_view attr, const BinSpec& bins) {
  const std::size_t col = numeric_column(table, attr);
  const auto values = cluster_values(table, col, cluster_members(assignment, cluster));
  if (values.empty()) {
    throw DataError("cluster " + std::to_string(cluster) + " has no values for '" + std::string(attr) + "'");
  }
  FrequencyDistribution dist;
  dist.cluster = cluster;
  dist.attribute = std::string(attr);
  dist.kind = AttributeKind::Numeric;
  dist.total = values.size();
  std::vector<std::size_t> counts(bins.size(), 0);
  for (double v : values) {
    auto idx = bins.locate(v);
    if (!idx) throw DataError("value outside the bin range of '" + std::string(attr) + "'");
    ++counts[*idx];
  }
  for (std::size_t i = 0; i < bins.size(); ++i) {
    dist.entries.push_back({i, counts[i], static_cast<double>(counts[i]) / static_cast<double>(dist.total)});
  }
  dist.bins = bins;
  return dist;
}

FrequencyDistribution numeric_distribution(const DataTable& table, const ClusterAssignment& assignment,
                                           std::size_t cluster, std::string_view attr, const BinRule& rule) {
  const std::size_t col = numeric_column(table, attr);
  const auto values = cluster_values(table, col, cluster_members(assignment, cluster));
  if (values.empty()) {
    throw DataError("cluster " + std::to_string(cluster) + " has no values for '" + std::string(attr) + "'");
  }
  return class_probabilities(table, assignment, cluster, attr, bin_numeric(values, rule));
}

FrequencyDistribution categorical_probabilities(const DataTable& table, const ClusterAssignment& assignment,
                                                std::size_t cluster, std::string_view attr) {
  const std::size_t col = table.schema().index_of(attr);
  if (table.schema()[col].kind != AttributeKind::Categorical) {
    throw DataError("attribute '" + std::string(attr) + "' is not categorical");
  }
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (std::size_t r : cluster_members(assignment, cluster)) {
    const CellValue& v = table.at(r, col);
    if (v.is_missing()) continue;
    ++counts[v.to_string()];
    ++total;
  }
  if (total == 0) {
    throw DataError("cluster " + std::to_string(cluster) + " has no values for '" + std::string(attr) + "'");
  }
  FrequencyDistribution dist;
  dist.cluster = cluster;
  dist.attribute = std::string(attr);
  dist.kind = AttributeKind::Categorical;
  dist.total = total;
  for (auto& [label, count] : counts) {
    dist.entries.push_back({label, count, static_cast<double>(count) / static_cast<double>(total)});
  }
  return dist;
}

Threshold median_threshold(const FrequencyDistribution& dist) {
  if (dist.entries.empty()) throw DataError("median of an empty distribution");
  std::vector<double> p;
  p.reserve(dist.entries.size());
  for (const auto& e : dist.entries) p.push_back(e.probability);
  std::sort(p.begin(), p.end());
  const std::size_t m = p.size() / 2;
  const double median = p.size() % 2 ? p[m] : (p[m - 1] + p[m]) / 2.0;
  return {dist.cluster, dist.attribute, median};
}

std::string_view to_string(AndPolicy p) { return p == AndPolicy::Universal ? "universal" : "pairwise"; }

AndPolicy parse_and_policy(std::string_view s) {
  if (s == "universal") return AndPolicy::Universal;
  if (s == "pairwise") return AndPolicy::Pairwise;
  throw DataError("and-policy must be 'universal' or 'pairwise', got '" + std::string(s) + "'");
}

// ---- SensitivityMask ----

SensitivityMask::SensitivityMask(std::size_t rows, std::vector<std::string> attributes,
                                 std::vector<AttributeKind> kinds)
    : rows_(rows),
      attributes_(std::move(attributes)),
      kinds_(std::move(kinds)),
      flags_(rows_ * attributes_.size(), CellFlag::Missing) {
  if (kinds_.size() != attributes_.size()) throw DataError("mask attribute and kind lists differ in length");
}

std::optional<CellFlag> SensitivityMask::flag(std::size_t row, std::string_view attribute) const {
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    if (attributes_[a] == attribute) return flag(row, a);
  }
  return std::nullopt;
}

bool SensitivityMask::is_flagged(std::size_t row, std::string_view attribute) const {
  return flag(row, attribute) == CellFlag::Flagged;
}

bool SensitivityMask::record_flagged(std::size_t row) const {
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    if (flag(row, a) == CellFlag::Flagged) return true;
  }
  return false;
}

std::size_t SensitivityMask::flagged_cell_count() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), CellFlag::Flagged));
}

std::vector<CellRef> SensitivityMask::collect(AttributeKind kind, CellFlag f) const {
  std::vector<CellRef> out;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t a = 0; a < attributes_.size(); ++a) {
      if (kinds_[a] == kind && flag(r, a) == f) out.push_back({r, attributes_[a]});
    }
  }
  return out;
}

std::vector<CellRef> SensitivityMask::flagged_numeric() const { return collect(AttributeKind::Numeric, CellFlag::Flagged); }
std::vector<CellRef> SensitivityMask::unflagged_numeric() const {
  return collect(AttributeKind::Numeric, CellFlag::Unflagged);
}
std::vector<CellRef> SensitivityMask::flagged_categorical() const {
  return collect(AttributeKind::Categorical, CellFlag::Flagged);
}
std::vector<CellRef> SensitivityMask::unflagged_categorical() const {
  return collect(AttributeKind::Categorical, CellFlag::Unflagged);
}

// ---- analysis ----

std::vector<std::string> monitored_attributes(const Schema& schema) {
  std::vector<std::string> out;
  for (const auto& a : schema.attributes()) {
    if (is_monitored(a.role)) out.push_back(a.name);
  }
  return out;
}

SensitivityAnalysis analyze(const DataTable& table, const ClusterAssignment& assignment,
                            const std::vector<std::string>& monitored, const BinRule& rule) {
  if (assignment.record_count() != table.row_count()) {
    throw DataError("cluster assignment covers " + std::to_string(assignment.record_count()) + " records, table has " +
                    std::to_string(table.row_count()));
  }
  SensitivityAnalysis out;
  out.monitored = monitored;
  // One pass to group values per cluster keeps this O(n) per attribute.
  std::vector<std::vector<std::size_t>> members(assignment.k() + 1);
  for (std::size_t r = 0; r < table.row_count(); ++r) members[assignment.label(r)].push_back(r);

  for (const auto& attr : monitored) {
    const std::size_t col = table.schema().index_of(attr);
    const bool numeric = table.schema()[col].kind == AttributeKind::Numeric;
    for (std::size_t c = 1; c <= assignment.k(); ++c) {
      FrequencyDistribution dist;
      dist.cluster = c;
      dist.attribute = attr;
      dist.kind = table.schema()[col].kind;
      if (numeric) {
        const auto values = cluster_values(table, col, members[c]);
        if (values.empty()) continue;
        BinSpec bins = bin_numeric(values, rule);
        std::vector<std::size_t> counts(bins.size(), 0);
        for (double v : values) ++counts[*bins.locate(v)];
        dist.total = values.size();
        for (std::size_t i = 0; i < bins.size(); ++i) {
          dist.entries.push_back({i, counts[i], static_cast<double>(counts[i]) / static_cast<double>(dist.total)});
        }
        dist.bins = std::move(bins);
      } else {
        std::map<std::string, std::size_t> counts;
        for (std::size_t r : members[c]) {
          const CellValue& v = table.at(r, col);
          if (!v.is_missing()) ++counts[v.to_string()];
        }
        for (const auto& [label, count] : counts) dist.total += count;
        if (dist.total == 0) continue;
        for (auto& [label, count] : counts) {
          dist.entries.push_back({label, count, static_cast<double>(count) / static_cast<double>(dist.total)});
        }
      }
      out.thresholds.emplace(std::make_pair(c, attr), median_threshold(dist));
      out.distributions.emplace(std::make_pair(c, attr), std::move(dist));
    }
  }
  return out;
}

nlohmann::json SensitivityAnalysis::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [key, dist] : distributions) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : dist.entries) {
      nlohmann::json j{{"count", e.count}, {"probability", e.probability}};
      if (dist.kind == AttributeKind::Numeric) {
        const std::size_t i = std::get<std::size_t>(e.label);
        j["bin"] = i;
        j["lcl"] = dist.bins->bins()[i].lcl;
        j["ucl"] = dist.bins->bins()[i].ucl;
      } else {
        j["category"] = std::get<std::string>(e.label);
      }
      entries.push_back(std::move(j));
    }
    out.push_back({{"cluster", dist.cluster},
                   {"attribute", dist.attribute},
                   {"kind", to_string(dist.kind)},
                   {"total", dist.total},
                   {"threshold", thresholds.at(key).median},
                   {"entries", std::move(entries)}});
  }
  return out;
}

SensitivityMask flag_sensitive(const DataTable& table, const ClusterAssignment& assignment,
                               const SensitivityAnalysis& analysis, AndPolicy policy) {
  const auto& monitored = analysis.monitored;
  const std::size_t n = table.row_count();
  if (assignment.record_count() != n) throw DataError("cluster assignment does not match the table");

  std::vector<std::size_t> cols;
  std::vector<AttributeKind> kinds;
  std::vector<bool> sensitive;
  for (const auto& attr : monitored) {
    const std::size_t col = table.schema().index_of(attr);
    cols.push_back(col);
    kinds.push_back(table.schema()[col].kind);
    sensitive.push_back(is_sensitive(table.schema()[col].role));
  }
  SensitivityMask mask(n, monitored, kinds);
  const std::size_t m = monitored.size();

  // passes[a]: the cell reaches its cluster threshold. Missing cells never pass.
  std::vector<char> passes(m);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = assignment.label(r);
    for (std::size_t a = 0; a < m; ++a) {
      const CellValue& v = table.at(r, cols[a]);
      passes[a] = 0;
      if (v.is_missing()) continue;
      const auto key = std::make_pair(c, monitored[a]);
      auto dist = analysis.distributions.find(key);
      auto thr = analysis.thresholds.find(key);
      if (dist == analysis.distributions.end() || thr == analysis.thresholds.end()) {
        throw DataError("no distribution/threshold for cluster " + std::to_string(c) + ", attribute '" +
                        monitored[a] + "'");
      }
      const auto p = dist->second.probability_of(v);
      passes[a] = p && *p >= thr->second.median;
    }

    std::vector<bool> flagged(m, false);
    if (policy == AndPolicy::Universal) {
      const bool all = m > 0 && std::all_of(passes.begin(), passes.end(), [](char x) { return x != 0; });
      std::fill(flagged.begin(), flagged.end(), all);
    } else {
      const bool any_sensitive = std::find(sensitive.begin(), sensitive.end(), true) != sensitive.end();
      const bool any_quasi = std::find(sensitive.begin(), sensitive.end(), false) != sensitive.end();
      for (std::size_t j = 0; j < m; ++j) {
        if (!passes[j]) continue;
        if (sensitive[j] && !any_quasi) flagged[j] = true;
        if (!sensitive[j] && !any_sensitive) flagged[j] = true;
        for (std::size_t k = 0; k < m; ++k) {
          if (sensitive[j] && !sensitive[k] && passes[k]) flagged[j] = flagged[k] = true;
        }
      }
    }
    for (std::size_t a = 0; a < m; ++a) {
      if (table.at(r, cols[a]).is_missing()) continue;
      mask.set(r, a, flagged[a] ? CellFlag::Flagged : CellFlag::Unflagged);
    }
  }
  return mask;
}

}  // namespace fuzzanon
