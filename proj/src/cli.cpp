#include "fuzzanon/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "fuzzanon/error.hpp"
#include "fuzzanon/pipeline.hpp"

namespace fuzzanon::cli {

namespace {

struct GlobalFlags {
  std::string schema;
  std::string config;
  bool quiet = false;
};

Schema require_schema(const GlobalFlags& g) {
  if (g.schema.empty()) throw DataError("--schema PATH is required");
  return Schema::load(g.schema);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string fmt_real(double v) {
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

int cmd_profile(const GlobalFlags& g, const std::string& input, std::ostream& out) {
  const Schema schema = require_schema(g);
  const DataTable table = load_csv(input, schema);

  std::map<AttributeRole, std::size_t> roles;
  for (const auto& a : table.schema().attributes()) ++roles[a.role];
  const auto count = [&](AttributeRole r) { return roles.count(r) ? roles[r] : 0; };
  out << input << ": " << table.row_count() << " records, " << table.column_count() << " attributes\n";
  out << "identifiers " << count(AttributeRole::Identifier) << ", sensitive "
      << count(AttributeRole::SensitiveNumeric) + count(AttributeRole::SensitiveCategorical) << ", quasi "
      << count(AttributeRole::QuasiNumeric) + count(AttributeRole::QuasiCategorical) << ", non-sensitive "
      << count(AttributeRole::NonSensitive) << "\n\n";

  out << std::left << std::setw(22) << "attribute" << std::setw(22) << "role" << std::setw(13) << "kind"
      << std::right << std::setw(8) << "count" << std::setw(9) << "missing" << std::setw(14) << "min"
      << std::setw(14) << "max" << std::setw(10) << "distinct" << "\n";
  for (const auto& a : table.schema().attributes()) {
    const auto s = column_stats(table, a.name);
    out << std::left << std::setw(22) << a.name << std::setw(22) << to_string(a.role) << std::setw(13)
        << to_string(a.kind) << std::right << std::setw(8) << s.count << std::setw(9) << s.missing << std::setw(14)
        << (s.min ? fmt_real(*s.min) : "-") << std::setw(14) << (s.max ? fmt_real(*s.max) : "-") << std::setw(10)
        << s.distinct << "\n";
  }

  const auto violations = validate_schema(table, schema.reordered([&] {
    std::vector<std::string> names;
    for (const auto& a : table.schema().attributes()) names.push_back(a.name);
    return names;
  }()));
  for (const auto& v : violations) out << "warning: " << v.message << "\n";
  return kExitOk;
}

int cmd_reconstruct(const GlobalFlags& g, const std::string& modified, const std::string& meta_path,
                    std::string output, std::ostream& out) {
  const TransformMetadata meta = TransformMetadata::load(meta_path);
  const Schema schema = g.schema.empty() ? meta.schema : Schema::load(g.schema);
  if (schema.fingerprint() != meta.schema_fingerprint) {
    throw DataError(meta_path + ": schema fingerprint " + meta.schema_fingerprint + " does not match " +
                    schema.fingerprint());
  }
  const DataTable table = load_csv(modified, schema);
  const auto result = reconstruct(table, meta);
  if (output.empty()) output = std::filesystem::path(modified).replace_extension(".reconstructed.csv").string();
  write_csv(result.table, output);
  if (!g.quiet) {
    out << "recovered " << result.recovered << " fuzzified cells; " << result.unrecoverable.size()
        << " suppressed/generalized cells are not recoverable\n";
    out << "wrote " << output << "\n";
  }
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& paths, bool baseline, bool csv, std::ostream& out) {
  bool first = true;
  for (const auto& p : paths) {
    const auto doc = read_json(p);
    try {
      if (csv) {
        out << chart_csv(doc);
        continue;
      }
      if (!first) out << "\n";
      first = false;
      out << "== " << p << "\n" << render_report(doc, baseline);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(p + ": not a report document (" + e.what() + ")");
    }
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster-wise fuzzification and anonymization of tabular data", "fuzzanon"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--schema", g.schema, "Schema JSON file");
  app.add_option("--config", g.config, "Pipeline config JSON; flags override it");
  app.add_flag("--quiet", g.quiet, "Suppress summaries");

  std::string profile_input;
  auto* profile = app.add_subcommand("profile", "Per-attribute roles and statistics");
  profile->add_option("input", profile_input, "Input CSV")->required();

  PipelineConfig cfg;
  std::string input, k_str, bins, policy, token, output, meta, report, analysis, dendrogram;
  std::vector<std::string> features;
  bool drop_identifiers = false;
  auto* transform = app.add_subcommand("transform", "Cluster, flag and transform a dataset");
  transform->add_option("input", input, "Input CSV");
  auto* k_opt = transform->add_option("-k", k_str, "Cluster count");
  auto* bins_opt = transform->add_option("--bins", bins, "sturges or a fixed bin count");
  auto* policy_opt = transform->add_option("--and-policy", policy, "universal or pairwise");
  auto* token_opt = transform->add_option("--token", token, "Default suppression token");
  auto* out_opt = transform->add_option("-o,--output", output, "Output CSV");
  auto* meta_opt = transform->add_option("--meta", meta, "Metadata sidecar path");
  auto* report_opt = transform->add_option("--report", report, "Report JSON path");
  auto* analysis_opt = transform->add_option("--analysis", analysis, "Write distributions and thresholds JSON");
  auto* dendro_opt = transform->add_option("--dendrogram", dendrogram, "Write the merge history JSON");
  auto* feat_opt = transform->add_option("--features", features, "Clustering attributes")->delimiter(',');
  auto* drop_opt = transform->add_flag("--drop-identifiers", drop_identifiers, "Drop identifier columns");

  std::string rec_modified, rec_meta, rec_output;
  auto* recon = app.add_subcommand("reconstruct", "Invert fuzzified cells using the sidecar");
  recon->add_option("modified", rec_modified, "Transformed CSV")->required();
  recon->add_option("metadata", rec_meta, "Sidecar .meta.json")->required();
  recon->add_option("-o,--output", rec_output, "Reconstructed CSV");

  std::vector<std::string> report_paths;
  bool with_baseline = false;
  bool as_csv = false;
  auto* rep = app.add_subcommand("report", "Render report documents");
  rep->add_option("reports", report_paths, "Report JSON files")->required();
  rep->add_flag("--baseline", with_baseline, "Add the sanitization comparison");
  rep->add_flag("--csv", as_csv, "Emit chart data as CSV");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "fuzzanon: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (profile->parsed()) return cmd_profile(g, profile_input, out);
    if (recon->parsed()) return cmd_reconstruct(g, rec_modified, rec_meta, rec_output, out);
    if (rep->parsed()) return cmd_report(report_paths, with_baseline, as_csv, out);

    if (!g.config.empty()) cfg.merge_json(read_json(g.config));
    if (!input.empty()) cfg.input = input;
    if (!g.schema.empty()) cfg.schema = g.schema;
    if (k_opt->count()) {
      long long k = 0;
      try {
        std::size_t used = 0;
        k = std::stoll(k_str, &used);
        if (used != k_str.size()) throw std::invalid_argument(k_str);
      } catch (const std::exception&) {
        throw DataError("-k expects a positive integer, got '" + k_str + "'");
      }
      if (k < 1) throw DataError("-k must be at least 1");
      cfg.k = static_cast<std::size_t>(k);
    }
    if (bins_opt->count()) cfg.bins = BinRule::parse(bins);
    if (policy_opt->count()) cfg.and_policy = parse_and_policy(policy);
    if (token_opt->count()) cfg.token = token;
    if (out_opt->count()) cfg.output = output;
    if (meta_opt->count()) cfg.meta = meta;
    if (report_opt->count()) cfg.report = report;
    if (analysis_opt->count()) cfg.analysis = analysis;
    if (dendro_opt->count()) cfg.dendrogram = dendrogram;
    if (feat_opt->count()) cfg.features = features;
    if (drop_opt->count()) cfg.drop_identifiers = drop_identifiers;
    if (cfg.output.empty() && !cfg.input.empty()) {
      cfg.output = std::filesystem::path(cfg.input).replace_extension(".anon.csv");
    }
    cfg.resolve_paths();

    const auto result = run_pipeline(cfg);
    if (!g.quiet) {
      out << render_report(result.report.to_json(), false);
      out << "wrote " << cfg.output.string() << ", " << cfg.meta.string() << ", " << cfg.report.string() << "\n";
    }
    return kExitOk;
  } catch (const StageError& e) {
    err << "fuzzanon: stage " << e.what() << "\n";
    const auto& s = e.stage();
    return s == "config" || s == "load" || s == "write" ? kExitUsage : kExitStage;
  } catch (const DataError& e) {
    err << "fuzzanon: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "fuzzanon: internal error: " << e.what() << "\n";
    return kExitStage;
  }
}

}  // namespace fuzzanon::cli
