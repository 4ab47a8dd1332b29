#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzanon/clustering.hpp"
#include "fuzzanon/data_model.hpp"
#include "fuzzanon/sensitivity.hpp"
#include "fuzzanon/transforms.hpp"

namespace fuzzanon {

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path schema;
  std::size_t k = 5;
  BinRule bins;
  AndPolicy and_policy = AndPolicy::Universal;
  std::string token = "Unknown";
  std::vector<std::string> features;  // empty = numeric sensitive + quasi attributes
  bool drop_identifiers = false;
  std::filesystem::path output;
  std::filesystem::path meta;    // default: <output stem>.meta.json
  std::filesystem::path report;  // default: <output stem>.report.json
  std::filesystem::path analysis;    // optional distribution/threshold dump
  std::filesystem::path dendrogram;  // optional merge history dump
  std::uint64_t seed = 0;            // reserved; the pipeline is deterministic

  /// Throws DataError naming the first invalid field.
  void validate() const;
  /// Fills meta/report paths derived from the output path.
  void resolve_paths();

  nlohmann::json to_json() const;
  /// Overlays the fields present in `doc` onto this config.
  void merge_json(const nlohmann::json& doc);
};

struct ClusterSummary {
  std::size_t id = 0;
  std::size_t size = 0;
  std::size_t flagged = 0;         // flagged records
  std::size_t modified_cells = 0;  // flagged monitored cells
  double fraction = 0;             // flagged / size
  std::map<std::string, double> thresholds;
};

struct ModificationReport {
  std::vector<ClusterSummary> clusters;
  std::size_t records = 0;
  std::size_t flagged = 0;
  std::size_t modified_cells = 0;
  double fraction = 0;
  /// Share of each monitored attribute's non-Missing cells that were flagged.
  std::map<std::string, double> attribute_sensitivity;

  nlohmann::json to_json() const;
};

ModificationReport modification_report(const SensitivityMask& mask, const ClusterAssignment& assignment,
                                       const std::map<std::pair<std::size_t, std::string>, Threshold>& thresholds);

struct PipelineResult {
  DataTable table;
  TransformMetadata metadata;
  ModificationReport report;
  ClusterAssignment assignment;
  std::vector<MergeStep> merges;
  std::vector<std::string> features;  // clustering columns actually used
  SensitivityAnalysis analysis;
  SensitivityMask mask;
};

/// In-memory run: cluster, analyze, flag, transform.
PipelineResult run_pipeline(const DataTable& input, const PipelineConfig& config);

/// File-based run: loads the input, runs, and writes the CSV, sidecar and report.
PipelineResult run_pipeline(const PipelineConfig& config);

struct BaselineResult {
  DataTable table;
  std::string input_fingerprint;
  std::size_t input_columns = 0;
  std::vector<std::string> removed;
};

/// Drops identifier, sensitive and quasi columns; rows stay as they are.
DataTable sanitize_baseline(const DataTable& table);
BaselineResult sanitize_baseline_result(const DataTable& table);

struct ComparisonReport {
  std::size_t input_columns = 0;
  std::size_t pipeline_columns = 0;
  std::size_t pipeline_reconstructable = 0;
  std::size_t baseline_columns = 0;
  std::size_t baseline_reconstructable = 0;
  std::vector<std::string> removed_by_baseline;

  nlohmann::json to_json() const;
};

ComparisonReport compare_reports(const PipelineResult& pipeline, const BaselineResult& baseline);

/// Full report document written next to the output CSV.
nlohmann::json report_document(const PipelineResult& result, const ComparisonReport& comparison,
                               const PipelineConfig& config, const DataTable& input);

/// Aligned-text rendering of a report document.
std::string render_report(const nlohmann::json& report, bool with_baseline);
/// cluster_id,records,modified,fraction
std::string chart_csv(const nlohmann::json& report);

}  // namespace fuzzanon
