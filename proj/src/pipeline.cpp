#include "fuzzanon/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fuzzanon/error.hpp"

namespace fuzzanon {

// ---- config ----

void PipelineConfig::validate() const {
  if (k < 1) throw DataError("k must be at least 1");
  if (input.empty()) throw DataError("input path is empty");
  if (schema.empty()) throw DataError("schema path is empty");
  if (output.empty()) throw DataError("output path is empty");
}

void PipelineConfig::resolve_paths() {
  if (output.empty()) return;
  auto sibling = [&](const char* ext) {
    auto p = output;
    return p.replace_extension(ext);
  };
  if (meta.empty()) meta = sibling(".meta.json");
  if (report.empty()) report = sibling(".report.json");
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"input", input.string()},
          {"schema", schema.string()},
          {"k", k},
          {"bins", bins.to_string()},
          {"and_policy", to_string(and_policy)},
          {"token", token},
          {"features", features},
          {"drop_identifiers", drop_identifiers},
          {"output", output.string()},
          {"meta", meta.string()},
          {"report", report.string()},
          {"analysis", analysis.string()},
          {"dendrogram", dendrogram.string()},
          {"seed", seed}};
}

void PipelineConfig::merge_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DataError("config document must be a JSON object");
  static const std::vector<std::string> known = {"input", "schema", "k", "bins", "and_policy", "token", "features",
                                                 "drop_identifiers", "output", "meta", "report", "analysis",
                                                 "dendrogram", "seed"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw DataError("unknown config key '" + key + "'");
  }
  try {
    if (doc.contains("input")) input = doc["input"].get<std::string>();
    if (doc.contains("schema")) schema = doc["schema"].get<std::string>();
    if (doc.contains("k")) {
      const auto v = doc["k"].get<long long>();
      if (v < 1) throw DataError("k must be at least 1");
      k = static_cast<std::size_t>(v);
    }
    if (doc.contains("bins")) {
      bins = doc["bins"].is_number_integer() ? BinRule::parse(std::to_string(doc["bins"].get<long long>()))
                                             : BinRule::parse(doc["bins"].get<std::string>());
    }
    if (doc.contains("and_policy")) and_policy = parse_and_policy(doc["and_policy"].get<std::string>());
    if (doc.contains("token")) token = doc["token"].get<std::string>();
    if (doc.contains("features")) features = doc["features"].get<std::vector<std::string>>();
    if (doc.contains("drop_identifiers")) drop_identifiers = doc["drop_identifiers"].get<bool>();
    if (doc.contains("output")) output = doc["output"].get<std::string>();
    if (doc.contains("meta")) meta = doc["meta"].get<std::string>();
    if (doc.contains("report")) report = doc["report"].get<std::string>();
    if (doc.contains("analysis")) analysis = doc["analysis"].get<std::string>();
    if (doc.contains("dendrogram")) dendrogram = doc["dendrogram"].get<std::string>();
    if (doc.contains("seed")) seed = doc["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed config: ") + e.what());
  }
}

// ---- reports ----

nlohmann::json ModificationReport::to_json() const {
  nlohmann::json cl = nlohmann::json::array();
  for (const auto& c : clusters) {
    cl.push_back({{"id", c.id},
                  {"size", c.size},
                  {"flagged", c.flagged},
                  {"modified_cells", c.modified_cells},
                  {"fraction", c.fraction},
                  {"thresholds", c.thresholds}});
  }
  return {{"clusters", std::move(cl)},
          {"totals",
           {{"records", records}, {"flagged", flagged}, {"modified_cells", modified_cells}, {"fraction", fraction}}},
          {"attribute_sensitivity", attribute_sensitivity}};
}

ModificationReport modification_report(const SensitivityMask& mask, const ClusterAssignment& assignment,
                                       const std::map<std::pair<std::size_t, std::string>, Threshold>& thresholds) {
  ModificationReport rep;
  rep.records = assignment.record_count();
  rep.clusters.resize(assignment.k());
  for (std::size_t c = 0; c < assignment.k(); ++c) {
    rep.clusters[c].id = c + 1;
    rep.clusters[c].size = assignment.sizes()[c];
  }
  const std::size_t m = mask.attributes().size();
  std::vector<std::size_t> attr_flagged(m, 0);
  std::vector<std::size_t> attr_present(m, 0);
  for (std::size_t r = 0; r < mask.row_count() && r < rep.records; ++r) {
    auto& cs = rep.clusters[assignment.label(r) - 1];
    bool any = false;
    for (std::size_t a = 0; a < m; ++a) {
      const CellFlag f = mask.flag(r, a);
      if (f == CellFlag::Missing) continue;
      ++attr_present[a];
      if (f == CellFlag::Flagged) {
        ++attr_flagged[a];
        ++cs.modified_cells;
        any = true;
      }
    }
    if (any) ++cs.flagged;
  }
  for (auto& cs : rep.clusters) {
    cs.fraction = cs.size ? static_cast<double>(cs.flagged) / static_cast<double>(cs.size) : 0.0;
    rep.flagged += cs.flagged;
    rep.modified_cells += cs.modified_cells;
  }
  for (const auto& [key, thr] : thresholds) {
    if (key.first >= 1 && key.first <= rep.clusters.size()) rep.clusters[key.first - 1].thresholds[key.second] = thr.median;
  }
  rep.fraction = rep.records ? static_cast<double>(rep.flagged) / static_cast<double>(rep.records) : 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    rep.attribute_sensitivity[mask.attributes()[a]] =
        attr_present[a] ? static_cast<double>(attr_flagged[a]) / static_cast<double>(attr_present[a]) : 0.0;
  }
  return rep;
}

nlohmann::json ComparisonReport::to_json() const {
  return {{"input_columns", input_columns},
          {"pipeline", {{"columns_retained", pipeline_columns}, {"reconstructable_cells", pipeline_reconstructable}}},
          {"sanitization",
           {{"columns_retained", baseline_columns},
            {"reconstructable_cells", baseline_reconstructable},
            {"removed", removed_by_baseline}}}};
}

// ---- pipeline ----

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

ClusterAssignment single_cluster(std::size_t n) { return ClusterAssignment(1, std::vector<std::size_t>(n, 1)); }

}  // namespace

PipelineResult run_pipeline(const DataTable& input, const PipelineConfig& config) {
  PipelineResult res;
  const std::size_t n = input.row_count();

  stage("cluster", [&] {
    if (n == 0) {
      res.assignment = ClusterAssignment(0, {});
      return 0;
    }
    std::vector<std::string> selection = config.features;
    if (selection.empty()) selection = default_feature_selection(input.schema());
    if (selection.empty()) {
      for (const auto& a : input.schema().attributes()) {
        if (a.kind == AttributeKind::Numeric && a.role != AttributeRole::Identifier) selection.push_back(a.name);
      }
    }
    res.features = selection;
    if (selection.empty() && config.k == 1) {
      res.assignment = single_cluster(n);
      return 0;
    }
    auto features = feature_matrix(input, selection);
    auto ward = ward_cluster(features, config.k);
    res.assignment = std::move(ward.assignment);
    res.merges = std::move(ward.merges);
    return 0;
  });

  stage("analyze", [&] {
    res.analysis = analyze(input, res.assignment, monitored_attributes(input.schema()), config.bins);
    return 0;
  });
  stage("flag", [&] {
    res.mask = flag_sensitive(input, res.assignment, res.analysis, config.and_policy);
    return 0;
  });
  stage("transform", [&] {
    TransformOptions opts;
    opts.default_token = config.token;
    opts.drop_identifiers = config.drop_identifiers;
    auto t = apply_transforms(input, res.assignment, res.mask, opts);
    res.table = std::move(t.table);
    res.metadata = std::move(t.metadata);
    return 0;
  });
  res.report = modification_report(res.mask, res.assignment, res.analysis.thresholds);
  return res;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineConfig config = cfg;
  config.resolve_paths();
  stage("config", [&] {
    config.validate();
    return 0;
  });
  auto input = stage("load", [&] { return load_csv(config.input, Schema::load(config.schema)); });
  auto result = run_pipeline(input, config);
  stage("write", [&] {
    write_csv(result.table, config.output);
    result.metadata.save(config.meta);
    const auto comparison = compare_reports(result, sanitize_baseline_result(input));
    write_text(config.report, report_document(result, comparison, config, input).dump(2) + "\n");
    if (!config.analysis.empty()) write_text(config.analysis, result.analysis.to_json().dump(1) + "\n");
    if (!config.dendrogram.empty()) write_text(config.dendrogram, dendrogram_to_json(result.merges).dump() + "\n");
    return 0;
  });
  return result;
}

DataTable sanitize_baseline(const DataTable& table) {
  const Schema& schema = table.schema();
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].role == AttributeRole::NonSensitive) keep.push_back(c);
  }
  Schema out = schema.filtered([](const Attribute& a) { return a.role == AttributeRole::NonSensitive; });
  std::vector<Row> rows;
  rows.reserve(table.row_count());
  for (const auto& row : table.rows()) {
    Row r;
    r.reserve(keep.size());
    for (std::size_t c : keep) r.push_back(row[c]);
    rows.push_back(std::move(r));
  }
  return DataTable(std::move(out), std::move(rows));
}

BaselineResult sanitize_baseline_result(const DataTable& table) {
  BaselineResult out{sanitize_baseline(table), table.fingerprint(), table.column_count(), {}};
  for (const auto& a : table.schema().attributes()) {
    if (a.role != AttributeRole::NonSensitive) out.removed.push_back(a.name);
  }
  return out;
}

ComparisonReport compare_reports(const PipelineResult& pipeline, const BaselineResult& baseline) {
  if (pipeline.metadata.input_fingerprint != baseline.input_fingerprint) {
    throw DataError("pipeline and baseline outputs derive from different inputs");
  }
  ComparisonReport rep;
  rep.input_columns = baseline.input_columns;
  rep.pipeline_columns = pipeline.table.column_count();
  rep.pipeline_reconstructable = pipeline.metadata.recoverable_count();
  rep.baseline_columns = baseline.table.column_count();
  rep.baseline_reconstructable = 0;
  rep.removed_by_baseline = baseline.removed;
  return rep;
}

nlohmann::json report_document(const PipelineResult& result, const ComparisonReport& comparison,
                               const PipelineConfig& config, const DataTable& input) {
  auto doc = result.report.to_json();
  std::map<std::string, std::size_t> roles;
  for (const auto& a : input.schema().attributes()) ++roles[std::string(to_string(a.role))];
  std::size_t features = 0;
  for (const auto& a : input.schema().attributes()) {
    if (a.kind == AttributeKind::Numeric && is_monitored(a.role)) ++features;
  }
  nlohmann::json params = config.to_json();
  params["feature_columns"] = result.features;
  params["monitored"] = monitored_attributes(input.schema());
  params["clusters_requested"] = config.k;
  doc["parameters"] = std::move(params);
  doc["dataset"] = {{"records", input.row_count()},
                    {"attributes", input.column_count()},
                    {"roles", roles},
                    {"numeric_monitored", features}};
  doc["comparison"] = comparison.to_json();
  return doc;
}

// ---- rendering ----

namespace {

std::string fmt_pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * x);
  return buf;
}

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}

}  // namespace

std::string render_report(const nlohmann::json& report, bool with_baseline) {
  std::ostringstream out;
  const auto& clusters = report.at("clusters");
  std::vector<std::string> attrs;
  for (const auto& c : clusters) {
    for (const auto& [a, v] : c.at("thresholds").items()) {
      if (std::find(attrs.begin(), attrs.end(), a) == attrs.end()) attrs.push_back(a);
    }
  }
  if (report.contains("dataset")) {
    const auto& d = report["dataset"];
    out << "records " << d.value("records", 0) << ", attributes " << d.value("attributes", 0) << "\n";
  }
  out << "Cluster-wise modified records\n";
  out << pad("cluster", 8) << pad("records", 10) << pad("modified", 10) << pad("fraction", 10);
  for (const auto& a : attrs) out << pad("M(" + a + ")", std::max<std::size_t>(12, a.size() + 4));
  out << "\n";
  for (const auto& c : clusters) {
    out << pad(std::to_string(c.at("id").get<std::size_t>()), 8) << pad(std::to_string(c.at("size").get<std::size_t>()), 10)
        << pad(std::to_string(c.at("flagged").get<std::size_t>()), 10) << pad(fmt_pct(c.at("fraction").get<double>()), 10);
    for (const auto& a : attrs) {
      const auto& t = c.at("thresholds");
      out << pad(t.contains(a) ? fmt_num(t[a].get<double>()) : "-", std::max<std::size_t>(12, a.size() + 4));
    }
    out << "\n";
  }
  const auto& totals = report.at("totals");
  out << pad("total", 8) << pad(std::to_string(totals.at("records").get<std::size_t>()), 10)
      << pad(std::to_string(totals.at("flagged").get<std::size_t>()), 10)
      << pad(fmt_pct(totals.at("fraction").get<double>()), 10) << "\n";

  const auto& sens = report.at("attribute_sensitivity");
  if (!sens.empty()) {
    out << "\nSensitive share per attribute\n";
    for (const auto& [a, v] : sens.items()) out << "  " << a << ": " << fmt_pct(v.get<double>()) << "\n";
  }

  if (with_baseline) {
    if (!report.contains("comparison")) throw DataError("report has no comparison section");
    const auto& cmp = report["comparison"];
    out << "\nPipeline vs sanitization\n";
    out << pad("", 14) << pad("columns", 10) << pad("reconstructable", 18) << "\n";
    out << pad("pipeline", 14) << pad(std::to_string(cmp["pipeline"]["columns_retained"].get<std::size_t>()), 10)
        << pad(std::to_string(cmp["pipeline"]["reconstructable_cells"].get<std::size_t>()), 18) << "\n";
    out << pad("sanitization", 14) << pad(std::to_string(cmp["sanitization"]["columns_retained"].get<std::size_t>()), 10)
        << pad(std::to_string(cmp["sanitization"]["reconstructable_cells"].get<std::size_t>()), 18) << "\n";
  }
  return out.str();
}

std::string chart_csv(const nlohmann::json& report) {
  std::string out = "cluster_id,records,modified,fraction\r\n";
  for (const auto& c : report.at("clusters")) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%.6f\r\n", c.at("id").get<std::size_t>(), c.at("size").get<std::size_t>(),
                  c.at("flagged").get<std::size_t>(), c.at("fraction").get<double>());
    out += buf;
  }
  return out;
}

}  // namespace fuzzanon
