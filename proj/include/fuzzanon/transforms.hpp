#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fuzzanon/clustering.hpp"
#include "fuzzanon/data_model.hpp"
#include "fuzzanon/sensitivity.hpp"

namespace fuzzanon {

/// S-shaped membership degree of `alpha` over [beta, gamma]:
///
///   0                            alpha <= beta
///   2((alpha-beta)/(gamma-beta))^2      beta <= alpha <= (beta+gamma)/2
///   1 - 2((alpha-gamma)/(gamma-beta))^2 (beta+gamma)/2 <= alpha <= gamma
///   1                            alpha >= gamma
///
/// With beta == gamma the function is a step: 0 below, 0.5 at the point, 1 above.
double s_membership(double alpha, double beta, double gamma);

/// Inverse of s_membership on [beta, gamma]. Returns beta when beta == gamma.
/// Throws DataError when s is outside [0, 1] or beta > gamma.
double inverse_s(double s, double beta, double gamma);

/// Text becomes the token; Missing stays Missing.
CellValue suppress(const CellValue& value, const std::string& token);
/// Hierarchy label for the value, or the fallback token when the value has none.
CellValue generalize(const CellValue& value, const std::map<std::string, std::string>& hierarchy,
                     const std::string& fallback);

struct FuzzyParams {
  std::size_t cluster = 0;
  std::string attribute;
  double beta = 0;   // cluster minimum
  double gamma = 0;  // cluster maximum
};

/// Per-cluster min/max of a numeric attribute over non-Missing cells, indexed by cluster - 1.
std::vector<FuzzyParams> compute_fuzzy_params(const DataTable& table, const ClusterAssignment& assignment,
                                              std::string_view attr);

enum class TransformAction { Fuzzified, Suppressed, Generalized };
std::string_view to_string(TransformAction a);
TransformAction parse_action(std::string_view s);

struct LedgerEntry {
  std::size_t row = 0;
  std::string attribute;
  TransformAction action = TransformAction::Fuzzified;

  bool recoverable() const { return action == TransformAction::Fuzzified; }
  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct TransformMetadata {
  std::string schema_fingerprint;
  std::string input_fingerprint;
  Schema schema;  // schema of the modified table
  std::size_t k = 0;
  std::vector<std::size_t> labels;
  std::vector<FuzzyParams> params;
  std::vector<LedgerEntry> ledger;
  std::map<std::string, std::string> tokens;  // attribute -> token used

  const FuzzyParams* find_params(std::size_t cluster, std::string_view attr) const;
  std::size_t recoverable_count() const;

  nlohmann::json to_json() const;
  static TransformMetadata from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static TransformMetadata load(const std::filesystem::path& path);
};

struct TransformOptions {
  std::string default_token = "Unknown";
  /// Identifier columns: suppress every cell (default) or drop the column.
  bool drop_identifiers = false;
};

/// Token used for a flagged categorical cell of `attr`.
std::string token_for(const Attribute& attr, const TransformOptions& options);

struct TransformResult {
  DataTable table;
  TransformMetadata metadata;
};

/// Fuzzifies flagged numeric cells with their cluster's (beta, gamma), and suppresses or
/// generalizes flagged categorical cells. Identifier columns are suppressed or dropped.
/// Every other cell is copied unchanged, and every changed cell gets one ledger entry.
TransformResult apply_transforms(const DataTable& table, const ClusterAssignment& assignment,
                                 const SensitivityMask& mask, const TransformOptions& options = {});

struct ReconstructionResult {
  DataTable table;
  std::size_t recovered = 0;
  std::vector<LedgerEntry> unrecoverable;
};

/// Inverts every fuzzified ledger entry; suppressed and generalized cells stay as they are.
ReconstructionResult reconstruct(const DataTable& modified, const TransformMetadata& metadata);

}  // namespace fuzzanon
