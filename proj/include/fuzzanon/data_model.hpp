#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace fuzzanon {

/// A single table cell: a finite real, a non-empty string, or Missing.
class CellValue {
 public:
  CellValue() = default;

  static CellValue missing() { return {}; }
  /// Throws DataError for NaN or infinite input.
  static CellValue numeric(double v);
  /// Empty text collapses to Missing.
  static CellValue text(std::string s);

  bool is_missing() const { return std::holds_alternative<std::monostate>(value_); }
  bool is_numeric() const { return std::holds_alternative<double>(value_); }
  bool is_text() const { return std::holds_alternative<std::string>(value_); }

  double as_numeric() const { return std::get<double>(value_); }
  const std::string& as_text() const { return std::get<std::string>(value_); }

  /// CSV field text; numbers use the shortest round-trip representation.
  std::string to_string() const;

  friend bool operator==(const CellValue&, const CellValue&) = default;

 private:
  std::variant<std::monostate, double, std::string> value_;
};

enum class AttributeRole {
  Identifier,
  SensitiveNumeric,
  SensitiveCategorical,
  QuasiNumeric,
  QuasiCategorical,
  NonSensitive,
};

enum class AttributeKind { Numeric, Categorical };

std::string_view to_string(AttributeRole role);
std::string_view to_string(AttributeKind kind);
AttributeRole parse_role(std::string_view s);
AttributeKind parse_kind(std::string_view s);

bool is_sensitive(AttributeRole role);
bool is_quasi(AttributeRole role);
/// Sensitive or quasi: the attributes whose cells are checked against thresholds.
bool is_monitored(AttributeRole role);

struct Attribute {
  std::string name;
  AttributeRole role = AttributeRole::NonSensitive;
  AttributeKind kind = AttributeKind::Categorical;
  std::optional<std::map<std::string, std::string>> hierarchy;
  std::optional<std::string> token;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

class Schema {
 public:
  Schema() = default;
  /// Throws DataError when the attribute list breaks a schema invariant.
  explicit Schema(std::vector<Attribute> attributes, std::vector<std::string> missing_markers = {"?"});

  /// Unchecked construction, for validate_schema tests and tooling.
  static Schema unchecked(std::vector<Attribute> attributes, std::vector<std::string> missing_markers = {"?"});

  static Schema from_json(const nlohmann::json& doc);
  static Schema load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const std::vector<Attribute>& attributes() const { return attributes_; }
  const std::vector<std::string>& missing_markers() const { return missing_markers_; }
  std::size_t size() const { return attributes_.size(); }
  const Attribute& operator[](std::size_t i) const { return attributes_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws DataError for unknown names.
  std::size_t index_of(std::string_view name) const;

  /// Shape violations of the schema itself; empty when valid.
  std::vector<std::string> shape_violations() const;

  /// Stable hex digest over names, roles and kinds.
  std::string fingerprint() const;

  /// Same schema with attributes reordered to follow `names`.
  Schema reordered(const std::vector<std::string>& names) const;
  /// Same schema keeping only attributes accepted by `keep`.
  template <typename Pred>
  Schema filtered(Pred keep) const {
    std::vector<Attribute> out;
    for (const auto& a : attributes_) {
      if (keep(a)) out.push_back(a);
    }
    return Schema(std::move(out), missing_markers_);
  }

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<Attribute> attributes_;
  std::vector<std::string> missing_markers_{"?"};
};

using Row = std::vector<CellValue>;

class DataTable {
 public:
  DataTable() = default;
  /// Throws DataError when any row length differs from the column count.
  DataTable(Schema schema, std::vector<Row> rows);

  const Schema& schema() const { return schema_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t column_count() const { return schema_.size(); }

  const CellValue& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }

  /// Content digest over header and every cell.
  std::string fingerprint() const;

  friend bool operator==(const DataTable&, const DataTable&) = default;

 private:
  Schema schema_;
  std::vector<Row> rows_;
};

struct ColumnStats {
  std::string attribute;
  std::optional<double> min;  // numeric attributes only
  std::optional<double> max;
  std::size_t count = 0;    // non-Missing cells
  std::size_t missing = 0;
  std::size_t distinct = 0;
};

struct Violation {
  enum class Kind { SchemaShape, ColumnMismatch, RowLength, TypeMismatch, UnknownHierarchyValue };
  Kind kind;
  std::optional<std::size_t> row;
  std::string column;
  std::string message;
};

/// Reads an RFC 4180 CSV. Columns are matched to the schema by name in any order;
/// the returned table keeps the file's column order.
DataTable load_csv(const std::filesystem::path& path, const Schema& schema);
DataTable parse_csv(std::string_view text, const Schema& schema, std::string_view source = "<memory>");

/// Missing cells are written as `missing_text` (empty by default).
void write_csv(const DataTable& table, const std::filesystem::path& path, std::string_view missing_text = {});
std::string to_csv(const DataTable& table, std::string_view missing_text = {});

ColumnStats column_stats(const DataTable& table, std::string_view attr);
/// Min and max of a numeric column; throws DataError on categorical or all-Missing columns.
std::pair<double, double> numeric_range(const DataTable& table, std::string_view attr);

std::vector<Violation> validate_schema(const DataTable& table, const Schema& schema);

/// Parses a whole field as a finite real; rejects locale separators and trailing junk.
std::optional<double> parse_number(std::string_view field);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace fuzzanon
