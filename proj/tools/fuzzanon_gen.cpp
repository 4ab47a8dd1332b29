// Writes deterministic synthetic datasets shaped like the census-income and
// bank-marketing data, plus matching schema files.
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fuzzanon/error.hpp"
#include "fuzzanon/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic Adults/Bank style datasets", "fuzzanon-gen"};
  std::string kind;
  std::size_t rows = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string schema_out;
  app.add_option("dataset", kind, "adults or bank")->required()->check(CLI::IsMember({"adults", "bank"}));
  app.add_option("-n,--rows", rows, "Row count (default: full dataset size)");
  app.add_option("--seed", seed, "Generator seed (default: per dataset)");
  app.add_option("-o,--output", out, "CSV path")->required();
  app.add_option("--schema-out", schema_out, "Also write the schema JSON here");
  CLI11_PARSE(app, argc, argv);

  try {
    const bool adults = kind == "adults";
    if (rows == 0) rows = adults ? fuzzanon::synthetic::kAdultsRows : fuzzanon::synthetic::kBankRows;
    auto* seed_opt = app.get_option("--seed");
    const auto table = adults ? (seed_opt->count() ? fuzzanon::synthetic::adults(rows, seed)
                                                   : fuzzanon::synthetic::adults(rows))
                              : (seed_opt->count() ? fuzzanon::synthetic::bank(rows, seed)
                                                   : fuzzanon::synthetic::bank(rows));
    fuzzanon::write_csv(table, out, adults ? "?" : "");
    if (!schema_out.empty()) {
      std::ofstream s(schema_out);
      s << table.schema().to_json().dump(2) << '\n';
      if (!s) throw fuzzanon::DataError(schema_out + ": write failed");
    }
  } catch (const std::exception& e) {
    std::cerr << "fuzzanon-gen: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
