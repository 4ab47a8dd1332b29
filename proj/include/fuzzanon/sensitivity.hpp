#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fuzzanon/clustering.hpp"
#include "fuzzanon/data_model.hpp"

namespace fuzzanon {

/// Bin count selection: Sturges (ceil(1 + log2 n)) or a fixed count.
struct BinRule {
  std::optional<std::size_t> fixed;  // empty = Sturges

  static BinRule sturges() { return {}; }
  static BinRule fixed_count(std::size_t n) { return {n}; }
  std::string to_string() const;
  /// "sturges" or a positive integer.
  static BinRule parse(std::string_view s);

  friend bool operator==(const BinRule&, const BinRule&) = default;
};

struct Bin {
  double lcl = 0;  // inclusive
  double ucl = 0;  // exclusive, except for the last bin
};

class BinSpec {
 public:
  explicit BinSpec(std::vector<Bin> bins);

  const std::vector<Bin>& bins() const { return bins_; }
  std::size_t size() const { return bins_.size(); }
  /// Index of the bin holding v, or nullopt when v lies outside [first lcl, last ucl].
  std::optional<std::size_t> locate(double v) const;

 private:
  std::vector<Bin> bins_;
};

std::size_t sturges_bin_count(std::size_t n);

/// Equal-width bins spanning [min, max] of `values`. Throws DataError on empty input.
BinSpec bin_numeric(std::span<const double> values, const BinRule& rule = {});

struct ClassEntry {
  std::variant<std::size_t, std::string> label;  // bin index or category
  std::size_t count = 0;
  double probability = 0;
};

struct FrequencyDistribution {
  std::size_t cluster = 0;
  std::string attribute;
  AttributeKind kind = AttributeKind::Numeric;
  std::vector<ClassEntry> entries;
  std::optional<BinSpec> bins;  // numeric only
  std::size_t total = 0;        // non-Missing values in the cluster

  /// Probability of the class that holds `v`; nullopt for Missing or out-of-range cells.
  std::optional<double> probability_of(const CellValue& v) const;
};

struct Threshold {
  std::size_t cluster = 0;
  std::string attribute;
  double median = 0;
};

/// Probability of each bin: values of the cluster in [lcl, ucl) over its non-Missing count.
FrequencyDistribution class_probabilities(const DataTable& table, const ClusterAssignment& assignment,
                                          std::size_t cluster, std::string_view attr, const BinSpec& bins);

/// Bins the cluster's own values with `rule`, then computes class probabilities.
FrequencyDistribution numeric_distribution(const DataTable& table, const ClusterAssignment& assignment,
                                           std::size_t cluster, std::string_view attr, const BinRule& rule);

/// One entry per distinct category, ordered by label.
FrequencyDistribution categorical_probabilities(const DataTable& table, const ClusterAssignment& assignment,
                                                std::size_t cluster, std::string_view attr);

/// Median of the entry probabilities (mean of the two middle values for even counts).
Threshold median_threshold(const FrequencyDistribution& dist);

enum class AndPolicy { Universal, Pairwise };
std::string_view to_string(AndPolicy p);
AndPolicy parse_and_policy(std::string_view s);

/// Per-cell state of the monitored attributes.
enum class CellFlag : unsigned char { Missing, Flagged, Unflagged };

struct CellRef {
  std::size_t row = 0;
  std::string attribute;

  friend bool operator==(const CellRef&, const CellRef&) = default;
  friend auto operator<=>(const CellRef&, const CellRef&) = default;
};

class SensitivityMask {
 public:
  SensitivityMask() = default;
  SensitivityMask(std::size_t rows, std::vector<std::string> attributes, std::vector<AttributeKind> kinds);

  std::size_t row_count() const { return rows_; }
  const std::vector<std::string>& attributes() const { return attributes_; }
  AttributeKind kind(std::size_t attr_index) const { return kinds_[attr_index]; }

  CellFlag flag(std::size_t row, std::size_t attr_index) const { return flags_[row * attributes_.size() + attr_index]; }
  void set(std::size_t row, std::size_t attr_index, CellFlag f) { flags_[row * attributes_.size() + attr_index] = f; }
  /// Flag of the named attribute; nullopt when the attribute is not monitored.
  std::optional<CellFlag> flag(std::size_t row, std::string_view attribute) const;
  bool is_flagged(std::size_t row, std::string_view attribute) const;

  /// True when any monitored cell of the row is flagged.
  bool record_flagged(std::size_t row) const;
  std::size_t flagged_cell_count() const;

  std::vector<CellRef> flagged_numeric() const;        // DA
  std::vector<CellRef> unflagged_numeric() const;      // RA
  std::vector<CellRef> flagged_categorical() const;    // MA
  std::vector<CellRef> unflagged_categorical() const;  // UA

  static SensitivityMask empty(std::size_t rows) { return SensitivityMask(rows, {}, {}); }

 private:
  std::vector<CellRef> collect(AttributeKind kind, CellFlag f) const;

  std::size_t rows_ = 0;
  std::vector<std::string> attributes_;
  std::vector<AttributeKind> kinds_;
  std::vector<CellFlag> flags_;
};

/// Distributions and thresholds for every (cluster, monitored attribute).
struct SensitivityAnalysis {
  std::vector<std::string> monitored;
  // Keyed by (cluster, attribute).
  std::map<std::pair<std::size_t, std::string>, FrequencyDistribution> distributions;
  std::map<std::pair<std::size_t, std::string>, Threshold> thresholds;

  nlohmann::json to_json() const;
};

/// Sensitive + quasi attributes of the schema, in column order.
std::vector<std::string> monitored_attributes(const Schema& schema);

SensitivityAnalysis analyze(const DataTable& table, const ClusterAssignment& assignment,
                            const std::vector<std::string>& monitored, const BinRule& rule);

/// Universal: a record is flagged iff every monitored cell reaches its cluster threshold, and then
/// all its monitored cells are flagged. Pairwise: each (sensitive, quasi) pair that jointly reaches
/// the thresholds flags both cells.
SensitivityMask flag_sensitive(const DataTable& table, const ClusterAssignment& assignment,
                               const SensitivityAnalysis& analysis, AndPolicy policy = AndPolicy::Universal);

}  // namespace fuzzanon
