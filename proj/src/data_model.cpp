#include "fuzzanon/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fuzzanon/error.hpp"

namespace fuzzanon {

namespace {

constexpr std::string_view kRoleNames[] = {
    "Identifier",  "SensitiveNumeric",  "SensitiveCategorical",
    "QuasiNumeric", "QuasiCategorical", "NonSensitive",
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

struct CsvRecord {
  std::vector<std::string> fields;
  std::vector<bool> quoted;
  std::size_t line = 0;
};

// RFC 4180 reader. Accepts LF or CRLF, ignores blank lines.
std::vector<CsvRecord> split_csv(std::string_view text, std::string_view source) {
  std::vector<CsvRecord> out;
  std::size_t i = 0;
  std::size_t line = 1;
  const std::size_t n = text.size();
  while (i < n) {
    if (text[i] == '\n' || text[i] == '\r') {
      if (text[i] == '\n') ++line;
      ++i;
      continue;
    }
    CsvRecord rec;
    rec.line = line;
    for (;;) {
      std::string field;
      bool quoted = false;
      std::size_t start = i;
      while (i < n && (text[i] == ' ' || text[i] == '\t')) ++i;
      if (i < n && text[i] == '"') {
        quoted = true;
        ++i;
        for (;;) {
          if (i >= n) throw DataError(std::string(source) + ": unterminated quoted field at line " + std::to_string(rec.line));
          if (text[i] == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              field += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (text[i] == '\n') ++line;
          field += text[i++];
        }
        while (i < n && (text[i] == ' ' || text[i] == '\t')) ++i;
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          throw DataError(std::string(source) + ": stray character after quoted field at line " + std::to_string(line));
        }
      } else {
        i = start;
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') ++i;
        field = std::string(trim(text.substr(start, i - start)));
      }
      rec.fields.push_back(std::move(field));
      rec.quoted.push_back(quoted);
      if (i < n && text[i] == ',') {
        ++i;
        continue;
      }
      break;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

bool needs_quoting(std::string_view s) {
  if (s.empty()) return false;
  if (s.front() == ' ' || s.front() == '\t' || s.back() == ' ' || s.back() == '\t') return true;
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view s) {
  if (!needs_quoting(s)) {
    out += s;
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

// ---- CellValue ----

CellValue CellValue::numeric(double v) {
  if (!std::isfinite(v)) throw DataError("numeric cell must be finite");
  CellValue c;
  c.value_ = v;
  return c;
}

CellValue CellValue::text(std::string s) {
  CellValue c;
  if (!s.empty()) c.value_ = std::move(s);
  return c;
}

std::string CellValue::to_string() const {
  if (is_missing()) return {};
  if (is_text()) return as_text();
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), as_numeric());
  return std::string(buf, end);
}

std::optional<double> parse_number(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  double v = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v, std::chars_format::general);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- roles ----

std::string_view to_string(AttributeRole role) { return kRoleNames[static_cast<int>(role)]; }

std::string_view to_string(AttributeKind kind) {
  return kind == AttributeKind::Numeric ? "numeric" : "categorical";
}

AttributeRole parse_role(std::string_view s) {
  for (int i = 0; i < 6; ++i) {
    if (kRoleNames[i] == s) return static_cast<AttributeRole>(i);
  }
  throw DataError("unknown attribute role '" + std::string(s) + "'");
}

AttributeKind parse_kind(std::string_view s) {
  if (s == "numeric") return AttributeKind::Numeric;
  if (s == "categorical") return AttributeKind::Categorical;
  throw DataError("unknown attribute kind '" + std::string(s) + "'");
}

bool is_sensitive(AttributeRole role) {
  return role == AttributeRole::SensitiveNumeric || role == AttributeRole::SensitiveCategorical;
}

bool is_quasi(AttributeRole role) {
  return role == AttributeRole::QuasiNumeric || role == AttributeRole::QuasiCategorical;
}

bool is_monitored(AttributeRole role) { return is_sensitive(role) || is_quasi(role); }

// ---- Schema ----

Schema::Schema(std::vector<Attribute> attributes, std::vector<std::string> missing_markers)
    : attributes_(std::move(attributes)), missing_markers_(std::move(missing_markers)) {
  auto problems = shape_violations();
  if (!problems.empty()) throw DataError("invalid schema: " + join(problems));
}

Schema Schema::unchecked(std::vector<Attribute> attributes, std::vector<std::string> missing_markers) {
  Schema s;
  s.attributes_ = std::move(attributes);
  s.missing_markers_ = std::move(missing_markers);
  return s;
}

std::vector<std::string> Schema::shape_violations() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& a : attributes_) {
    if (a.name.empty()) out.push_back("attribute with empty name");
    if (!seen.insert(a.name).second) out.push_back("duplicate attribute '" + a.name + "'");
    const bool numeric_role = a.role == AttributeRole::SensitiveNumeric || a.role == AttributeRole::QuasiNumeric;
    const bool categorical_role =
        a.role == AttributeRole::SensitiveCategorical || a.role == AttributeRole::QuasiCategorical;
    if (numeric_role && a.kind != AttributeKind::Numeric) {
      out.push_back("attribute '" + a.name + "' has role " + std::string(to_string(a.role)) + " but kind categorical");
    }
    if (categorical_role && a.kind != AttributeKind::Categorical) {
      out.push_back("attribute '" + a.name + "' has role " + std::string(to_string(a.role)) + " but kind numeric");
    }
    if (a.hierarchy && a.kind == AttributeKind::Numeric) {
      out.push_back("attribute '" + a.name + "' is numeric but has a hierarchy");
    }
  }
  return out;
}

Schema Schema::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("attributes") || !doc["attributes"].is_array()) {
    throw DataError("schema document needs an 'attributes' array");
  }
  std::vector<Attribute> attrs;
  try {
    for (const auto& item : doc["attributes"]) {
      Attribute a;
      a.name = item.at("name").get<std::string>();
      a.role = parse_role(item.at("role").get<std::string>());
      if (item.contains("kind")) {
        a.kind = parse_kind(item["kind"].get<std::string>());
      } else {
        a.kind = (a.role == AttributeRole::SensitiveNumeric || a.role == AttributeRole::QuasiNumeric)
                     ? AttributeKind::Numeric
                     : AttributeKind::Categorical;
      }
      if (item.contains("hierarchy") && !item["hierarchy"].is_null()) {
        a.hierarchy = item["hierarchy"].get<std::map<std::string, std::string>>();
      }
      if (item.contains("token") && !item["token"].is_null()) a.token = item["token"].get<std::string>();
      attrs.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed schema attribute: ") + e.what());
  }
  std::vector<std::string> markers{"?"};
  if (doc.contains("missing_markers")) markers = doc["missing_markers"].get<std::vector<std::string>>();
  return Schema(std::move(attrs), std::move(markers));
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open schema file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  try {
    return from_json(doc);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

nlohmann::json Schema::to_json() const {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : attributes_) {
    nlohmann::json j{{"name", a.name}, {"role", to_string(a.role)}, {"kind", to_string(a.kind)}};
    if (a.hierarchy) j["hierarchy"] = *a.hierarchy;
    if (a.token) j["token"] = *a.token;
    attrs.push_back(std::move(j));
  }
  return {{"attributes", std::move(attrs)}, {"missing_markers", missing_markers_}};
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw DataError("unknown attribute '" + std::string(name) + "'");
}

std::string Schema::fingerprint() const {
  std::string buf;
  for (const auto& a : attributes_) {
    buf += a.name;
    buf += '\x1f';
    buf += to_string(a.role);
    buf += '\x1f';
    buf += to_string(a.kind);
    buf += '\x1e';
  }
  return fnv1a_hex(buf);
}

Schema Schema::reordered(const std::vector<std::string>& names) const {
  std::vector<Attribute> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(attributes_[index_of(n)]);
  return Schema(std::move(out), missing_markers_);
}

// ---- DataTable ----

DataTable::DataTable(Schema schema, std::vector<Row> rows) : schema_(std::move(schema)), rows_(std::move(rows)) {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].size() != schema_.size()) {
      throw DataError("row " + std::to_string(r) + " has " + std::to_string(rows_[r].size()) + " cells, expected " +
                      std::to_string(schema_.size()));
    }
  }
}

std::string DataTable::fingerprint() const { return fnv1a_hex(to_csv(*this)); }

// ---- CSV ----

DataTable parse_csv(std::string_view text, const Schema& schema, std::string_view source) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  auto records = split_csv(text, source);
  if (records.empty()) throw DataError(std::string(source) + ": missing header row");

  const auto& header = records.front().fields;
  std::vector<std::string> unknown;
  std::vector<std::string> absent;
  std::set<std::string> header_set;
  for (const auto& h : header) {
    if (!header_set.insert(h).second) unknown.push_back(h + " (duplicate)");
    else if (!schema.find(h)) unknown.push_back(h);
  }
  for (const auto& a : schema.attributes()) {
    if (!header_set.count(a.name)) absent.push_back(a.name);
  }
  if (!unknown.empty() || !absent.empty()) {
    std::string msg = std::string(source) + ": header does not match schema;";
    if (!unknown.empty()) msg += " not in schema: [" + join(unknown) + "];";
    if (!absent.empty()) msg += " missing from header: [" + join(absent) + "]";
    throw DataError(msg);
  }

  Schema file_schema = schema.reordered(header);
  const auto& markers = schema.missing_markers();
  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw DataError(std::string(source) + ": row " + std::to_string(r) + " (line " + std::to_string(rec.line) +
                      ") has " + std::to_string(rec.fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    Row row;
    row.reserve(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string& f = rec.fields[c];
      const bool is_marker =
          !rec.quoted[c] && std::find(markers.begin(), markers.end(), f) != markers.end();
      if (f.empty() || is_marker) {
        row.push_back(CellValue::missing());
      } else if (file_schema[c].kind == AttributeKind::Numeric) {
        auto v = parse_number(f);
        row.push_back(v ? CellValue::numeric(*v) : CellValue::missing());
      } else {
        row.push_back(CellValue::text(f));
      }
    }
    rows.push_back(std::move(row));
  }
  return DataTable(std::move(file_schema), std::move(rows));
}

DataTable load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open input file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema, path.string());
}

std::string to_csv(const DataTable& table, std::string_view missing_text) {
  std::string out;
  const auto& attrs = table.schema().attributes();
  for (std::size_t c = 0; c < attrs.size(); ++c) {
    if (c) out += ',';
    append_field(out, attrs[c].name);
  }
  out += "\r\n";
  for (const auto& row : table.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      const CellValue& cell = row[c];
      if (cell.is_missing()) {
        out += missing_text;
        continue;
      }
      // Text that would re-parse as a number or a missing marker must stay text.
      if (cell.is_text()) {
        const auto& s = cell.as_text();
        const auto& markers = table.schema().missing_markers();
        if (std::find(markers.begin(), markers.end(), s) != markers.end() && !needs_quoting(s)) {
          out += '"' + s + '"';
          continue;
        }
      }
      append_field(out, cell.to_string());
    }
    out += "\r\n";
  }
  return out;
}

void write_csv(const DataTable& table, const std::filesystem::path& path, std::string_view missing_text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open output file for writing");
  const std::string text = to_csv(table, missing_text);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

// ---- statistics and validation ----

ColumnStats column_stats(const DataTable& table, std::string_view attr) {
  const std::size_t col = table.schema().index_of(attr);
  ColumnStats s;
  s.attribute = std::string(attr);
  const bool numeric = table.schema()[col].kind == AttributeKind::Numeric;
  std::unordered_set<double> distinct_num;
  std::unordered_set<std::string> distinct_text;
  for (const auto& row : table.rows()) {
    const CellValue& v = row[col];
    if (v.is_missing()) {
      ++s.missing;
      continue;
    }
    ++s.count;
    if (numeric && v.is_numeric()) {
      const double x = v.as_numeric();
      s.min = s.min ? std::min(*s.min, x) : x;
      s.max = s.max ? std::max(*s.max, x) : x;
      distinct_num.insert(x);
    } else {
      distinct_text.insert(v.to_string());
    }
  }
  s.distinct = distinct_num.size() + distinct_text.size();
  return s;
}

std::pair<double, double> numeric_range(const DataTable& table, std::string_view attr) {
  const std::size_t col = table.schema().index_of(attr);
  if (table.schema()[col].kind != AttributeKind::Numeric) {
    throw DataError("min/max requested on categorical attribute '" + std::string(attr) + "'");
  }
  auto s = column_stats(table, attr);
  if (!s.min) throw DataError("attribute '" + std::string(attr) + "' has no numeric values");
  return {*s.min, *s.max};
}

std::vector<Violation> validate_schema(const DataTable& table, const Schema& schema) {
  std::vector<Violation> out;
  for (auto& msg : schema.shape_violations()) {
    out.push_back({Violation::Kind::SchemaShape, std::nullopt, {}, std::move(msg)});
  }

  const Schema& ts = table.schema();
  std::vector<std::optional<std::size_t>> col_of(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    col_of[i] = ts.find(schema[i].name);
    if (!col_of[i]) {
      out.push_back({Violation::Kind::ColumnMismatch, std::nullopt, schema[i].name,
                     "column '" + schema[i].name + "' missing from table"});
    }
  }
  for (const auto& a : ts.attributes()) {
    if (!schema.find(a.name)) {
      out.push_back({Violation::Kind::ColumnMismatch, std::nullopt, a.name,
                     "column '" + a.name + "' not declared in schema"});
    }
  }

  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const Row& row = table.rows()[r];
    if (row.size() != ts.size()) {
      out.push_back({Violation::Kind::RowLength, r, {},
                     "row " + std::to_string(r) + " has " + std::to_string(row.size()) + " cells"});
      continue;
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (!col_of[i]) continue;
      const CellValue& v = row[*col_of[i]];
      const auto& a = schema[i];
      const bool bad = (a.kind == AttributeKind::Numeric && v.is_text()) ||
                       (a.kind == AttributeKind::Categorical && v.is_numeric());
      if (bad) {
        out.push_back({Violation::Kind::TypeMismatch, r, a.name,
                       "row " + std::to_string(r) + ", column '" + a.name + "': expected " +
                           std::string(to_string(a.kind)) + " value, got '" + v.to_string() + "'"});
      }
    }
  }

  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& a = schema[i];
    if (!col_of[i] || !a.hierarchy || a.kind != AttributeKind::Categorical) continue;
    std::set<std::string> reported;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
      const CellValue& v = table.rows()[r][*col_of[i]];
      if (!v.is_text() || a.hierarchy->count(v.as_text()) || !reported.insert(v.as_text()).second) continue;
      out.push_back({Violation::Kind::UnknownHierarchyValue, r, a.name,
                     "value '" + v.as_text() + "' of column '" + a.name + "' has no hierarchy entry"});
    }
  }
  return out;
}

}  // namespace fuzzanon
