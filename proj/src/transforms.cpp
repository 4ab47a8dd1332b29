#include "fuzzanon/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "fuzzanon/error.hpp"

namespace fuzzanon {

double s_membership(double alpha, double beta, double gamma) {
  if (beta > gamma) throw DataError("s_membership needs beta <= gamma");
  if (alpha <= beta) return alpha == beta && beta == gamma ? 0.5 : 0.0;
  if (alpha >= gamma) return 1.0;
  const double width = gamma - beta;
  const double mid = beta + width / 2.0;
  if (alpha == mid) return 0.5;
  if (alpha < mid) {
    const double t = (alpha - beta) / width;
    return 2.0 * t * t;
  }
  const double t = (alpha - gamma) / width;
  return 1.0 - 2.0 * t * t;
}

double inverse_s(double s, double beta, double gamma) {
  if (!(s >= 0.0 && s <= 1.0)) throw DataError("inverse_s needs s in [0, 1], got " + std::to_string(s));
  if (beta > gamma) throw DataError("inverse_s needs beta <= gamma");
  if (beta == gamma) return beta;
  const double width = gamma - beta;
  if (s == 0.5) return beta + width / 2.0;
  if (s < 0.5) return beta + width * std::sqrt(s / 2.0);
  return gamma - width * std::sqrt((1.0 - s) / 2.0);
}

CellValue suppress(const CellValue& value, const std::string& token) {
  if (value.is_missing()) return value;
  return CellValue::text(token);
}

CellValue generalize(const CellValue& value, const std::map<std::string, std::string>& hierarchy,
                     const std::string& fallback) {
  if (value.is_missing()) return value;
  auto it = hierarchy.find(value.to_string());
  return CellValue::text(it != hierarchy.end() ? it->second : fallback);
}

namespace {

// Params for every cluster that has at least one value; empty clusters stay unset.
std::vector<std::optional<FuzzyParams>> cluster_ranges(const DataTable& table, const ClusterAssignment& assignment,
                                                       std::string_view attr) {
  const std::size_t col = table.schema().index_of(attr);
  if (table.schema()[col].kind != AttributeKind::Numeric) {
    throw DataError("fuzzy parameters need a numeric attribute, '" + std::string(attr) + "' is categorical");
  }
  if (assignment.record_count() != table.row_count()) throw DataError("cluster assignment does not match the table");
  std::vector<std::optional<FuzzyParams>> out(assignment.k());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const CellValue& v = table.at(r, col);
    if (!v.is_numeric()) continue;
    auto& p = out[assignment.label(r) - 1];
    const double x = v.as_numeric();
    if (!p) {
      p = FuzzyParams{assignment.label(r), std::string(attr), x, x};
    } else {
      p->beta = std::min(p->beta, x);
      p->gamma = std::max(p->gamma, x);
    }
  }
  return out;
}

}  // namespace

std::vector<FuzzyParams> compute_fuzzy_params(const DataTable& table, const ClusterAssignment& assignment,
                                              std::string_view attr) {
  std::vector<FuzzyParams> out;
  auto ranges = cluster_ranges(table, assignment, attr);
  for (std::size_t c = 0; c < ranges.size(); ++c) {
    if (!ranges[c]) {
      throw DataError("cluster " + std::to_string(c + 1) + " has no values for '" + std::string(attr) + "'");
    }
    out.push_back(*ranges[c]);
  }
  return out;
}

std::string_view to_string(TransformAction a) {
  switch (a) {
    case TransformAction::Fuzzified:
      return "fuzzified";
    case TransformAction::Suppressed:
      return "suppressed";
    case TransformAction::Generalized:
      return "generalized";
  }
  return "?";
}

TransformAction parse_action(std::string_view s) {
  if (s == "fuzzified") return TransformAction::Fuzzified;
  if (s == "suppressed") return TransformAction::Suppressed;
  if (s == "generalized") return TransformAction::Generalized;
  throw DataError("unknown ledger action '" + std::string(s) + "'");
}

// ---- metadata ----

const FuzzyParams* TransformMetadata::find_params(std::size_t cluster, std::string_view attr) const {
  for (const auto& p : params) {
    if (p.cluster == cluster && p.attribute == attr) return &p;
  }
  return nullptr;
}

std::size_t TransformMetadata::recoverable_count() const {
  return static_cast<std::size_t>(
      std::count_if(ledger.begin(), ledger.end(), [](const LedgerEntry& e) { return e.recoverable(); }));
}

nlohmann::json TransformMetadata::to_json() const {
  nlohmann::json p = nlohmann::json::array();
  for (const auto& f : params) {
    p.push_back({{"cluster", f.cluster}, {"attr", f.attribute}, {"beta", f.beta}, {"gamma", f.gamma}});
  }
  nlohmann::json l = nlohmann::json::array();
  for (const auto& e : ledger) {
    l.push_back({{"row", e.row}, {"attr", e.attribute}, {"action", to_string(e.action)}, {"recoverable", e.recoverable()}});
  }
  return {{"schema_fingerprint", schema_fingerprint},
          {"input_fingerprint", input_fingerprint},
          {"schema", schema.to_json()},
          {"k", k},
          {"labels", labels},
          {"params", std::move(p)},
          {"ledger", std::move(l)},
          {"tokens", tokens}};
}

TransformMetadata TransformMetadata::from_json(const nlohmann::json& doc) {
  TransformMetadata m;
  try {
    m.schema_fingerprint = doc.at("schema_fingerprint").get<std::string>();
    m.input_fingerprint = doc.value("input_fingerprint", std::string{});
    m.schema = Schema::from_json(doc.at("schema"));
    m.k = doc.at("k").get<std::size_t>();
    m.labels = doc.at("labels").get<std::vector<std::size_t>>();
    for (const auto& p : doc.at("params")) {
      m.params.push_back({p.at("cluster").get<std::size_t>(), p.at("attr").get<std::string>(),
                          p.at("beta").get<double>(), p.at("gamma").get<double>()});
    }
    for (const auto& e : doc.at("ledger")) {
      m.ledger.push_back(
          {e.at("row").get<std::size_t>(), e.at("attr").get<std::string>(), parse_action(e.at("action").get<std::string>())});
    }
    m.tokens = doc.at("tokens").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metadata: ") + e.what());
  }
  return m;
}

void TransformMetadata::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open metadata file for writing");
  out << to_json().dump(1) << '\n';
  if (!out) throw DataError(path.string() + ": write failed");
}

TransformMetadata TransformMetadata::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open metadata file");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string token_for(const Attribute& attr, const TransformOptions& options) {
  return attr.token ? *attr.token : options.default_token;
}

// ---- apply / reconstruct ----

TransformResult apply_transforms(const DataTable& table, const ClusterAssignment& assignment,
                                 const SensitivityMask& mask, const TransformOptions& options) {
  const Schema& schema = table.schema();
  const std::size_t n = table.row_count();
  if (assignment.record_count() != n || mask.row_count() != n) {
    throw DataError("mask or cluster assignment does not match the table");
  }

  TransformMetadata meta;
  meta.k = assignment.k();
  meta.labels = assignment.labels();
  meta.input_fingerprint = table.fingerprint();

  std::vector<std::size_t> keep;  // input columns present in the output
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (options.drop_identifiers && schema[c].role == AttributeRole::Identifier) continue;
    keep.push_back(c);
  }
  std::vector<Attribute> out_attrs;
  for (std::size_t c : keep) out_attrs.push_back(schema[c]);
  Schema out_schema(std::move(out_attrs), schema.missing_markers());

  // Mask attribute index per input column, when monitored.
  std::vector<std::optional<std::size_t>> mask_index(schema.size());
  for (std::size_t a = 0; a < mask.attributes().size(); ++a) {
    mask_index[schema.index_of(mask.attributes()[a])] = a;
  }

  std::vector<std::vector<std::optional<FuzzyParams>>> ranges(schema.size());
  for (std::size_t c : keep) {
    const auto& attr = schema[c];
    if (mask_index[c] && attr.kind == AttributeKind::Numeric) {
      ranges[c] = cluster_ranges(table, assignment, attr.name);
      for (const auto& p : ranges[c]) {
        if (p) meta.params.push_back(*p);
      }
    }
    if (attr.kind == AttributeKind::Categorical && (mask_index[c] || attr.role == AttributeRole::Identifier)) {
      meta.tokens[attr.name] = token_for(attr, options);
    }
  }

  std::vector<Row> rows;
  rows.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    Row row;
    row.reserve(keep.size());
    for (std::size_t c : keep) {
      const auto& attr = schema[c];
      const CellValue& in = table.at(r, c);
      CellValue out = in;
      std::optional<TransformAction> action;
      if (attr.role == AttributeRole::Identifier) {
        out = attr.kind == AttributeKind::Numeric ? CellValue::missing() : suppress(in, meta.tokens.at(attr.name));
        action = TransformAction::Suppressed;
      } else if (mask_index[c] && mask.flag(r, *mask_index[c]) == CellFlag::Flagged) {
        if (attr.kind == AttributeKind::Numeric) {
          const auto& p = ranges[c][assignment.label(r) - 1];
          if (!p) {
            throw DataError("no fuzzy parameters for cluster " + std::to_string(assignment.label(r)) + ", attribute '" +
                            attr.name + "'");
          }
          out = CellValue::numeric(s_membership(in.as_numeric(), p->beta, p->gamma));
          action = TransformAction::Fuzzified;
        } else if (attr.hierarchy) {
          out = generalize(in, *attr.hierarchy, meta.tokens.at(attr.name));
          action = TransformAction::Generalized;
        } else {
          out = suppress(in, meta.tokens.at(attr.name));
          action = TransformAction::Suppressed;
        }
      }
      if (action && !(out == in)) meta.ledger.push_back({r, attr.name, *action});
      row.push_back(std::move(out));
    }
    rows.push_back(std::move(row));
  }

  meta.schema_fingerprint = out_schema.fingerprint();
  meta.schema = out_schema;
  return {DataTable(std::move(out_schema), std::move(rows)), std::move(meta)};
}

ReconstructionResult reconstruct(const DataTable& modified, const TransformMetadata& metadata) {
  if (metadata.schema.fingerprint() != metadata.schema_fingerprint) {
    throw DataError("metadata fingerprint " + metadata.schema_fingerprint + " does not match its embedded schema");
  }
  if (modified.schema().fingerprint() != metadata.schema_fingerprint) {
    throw DataError("metadata fingerprint " + metadata.schema_fingerprint + " does not match the table schema " +
                    modified.schema().fingerprint());
  }
  if (metadata.labels.size() != modified.row_count()) {
    throw DataError("metadata labels cover " + std::to_string(metadata.labels.size()) + " rows, table has " +
                    std::to_string(modified.row_count()));
  }

  std::vector<Row> rows = modified.rows();
  ReconstructionResult result;
  for (const auto& e : metadata.ledger) {
    auto col = modified.schema().find(e.attribute);
    if (e.row >= rows.size() || !col) {
      throw DataError("ledger entry (row " + std::to_string(e.row) + ", '" + e.attribute + "') is out of range");
    }
    if (!e.recoverable()) {
      result.unrecoverable.push_back(e);
      continue;
    }
    const CellValue& cell = rows[e.row][*col];
    if (!cell.is_numeric()) {
      throw DataError("fuzzified cell (row " + std::to_string(e.row) + ", '" + e.attribute + "') is not numeric");
    }
    const std::size_t cluster = metadata.labels[e.row];
    const FuzzyParams* p = metadata.find_params(cluster, e.attribute);
    if (!p) {
      throw DataError("no fuzzy parameters for cluster " + std::to_string(cluster) + ", attribute '" + e.attribute + "'");
    }
    rows[e.row][*col] = CellValue::numeric(inverse_s(cell.as_numeric(), p->beta, p->gamma));
    ++result.recovered;
  }
  result.table = DataTable(modified.schema(), std::move(rows));
  return result;
}

}  // namespace fuzzanon
