#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "fuzzanon/error.hpp"
#include "fuzzanon/sensitivity.hpp"
#include "support.hpp"

using namespace fuzzanon;
using namespace testing;

namespace {

FrequencyDistribution dist_of(std::vector<double> probabilities) {
  FrequencyDistribution d;
  d.kind = AttributeKind::Categorical;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    d.entries.push_back({std::to_string(i), 0, probabilities[i]});
  }
  return d;
}

// Cluster of five census-style records.
DataTable census_fixture() {
  const Schema s({numeric("Age", AttributeRole::QuasiNumeric),
                  categorical("Marital status"),
                  categorical("Occupation", AttributeRole::SensitiveCategorical),
                  categorical("Race", AttributeRole::SensitiveCategorical),
                  categorical("Sex", AttributeRole::QuasiCategorical),
                  categorical("Income", AttributeRole::SensitiveCategorical)});
  return DataTable(s, {
                          {num(50), txt("Married-civ-spouse"), txt("Other-service"), txt("Asian-Pac-Islander"),
                           txt("M"), txt("<=50K")},
                          {num(19), txt("Never-married"), txt("Sales"), txt("White"), txt("M"), txt("<=50K")},
                          {num(48), txt("Divorced"), txt("Other-service"), txt("Asian-Pac-Islander"), txt("M"),
                           txt("<=50K")},
                          {num(52), txt("Married-civ-spouse"), txt("Other-service"), txt("Asian-Pac-Islander"),
                           txt("M"), txt("<=50K")},
                          {num(49), txt("Separated"), txt("Other-service"), txt("Asian-Pac-Islander"), txt("M"),
                           txt("<=50K")},
                      });
}

}  // namespace

TEST_CASE("Sturges bin counts") {
  CHECK(sturges_bin_count(1) == 1);
  CHECK(sturges_bin_count(2) == 2);
  CHECK(sturges_bin_count(5) == 4);
  CHECK(sturges_bin_count(8) == 4);
  CHECK(sturges_bin_count(9) == 5);
  CHECK(sturges_bin_count(100) == 8);
  CHECK(sturges_bin_count(32561) == 16);
  for (std::size_t n = 1; n < 5000; n += 37) {
    CHECK(sturges_bin_count(n) == static_cast<std::size_t>(std::ceil(1 + std::log2(static_cast<double>(n)))));
  }
}

TEST_CASE("bin rules") {
  CHECK(BinRule::parse("sturges") == BinRule::sturges());
  CHECK(BinRule::parse("7") == BinRule::fixed_count(7));
  CHECK_THROWS_AS(BinRule::parse("0"), DataError);
  CHECK_THROWS_AS(BinRule::parse("-3"), DataError);
  CHECK_THROWS_AS(BinRule::parse("many"), DataError);
  CHECK(BinRule::parse(BinRule::fixed_count(4).to_string()) == BinRule::fixed_count(4));
}

TEST_CASE("equal-width bins") {
  const std::vector<double> ages{50, 19, 48, 52, 49};
  const auto spec = bin_numeric(ages);
  REQUIRE(spec.size() == 4);
  CHECK(spec.bins().front().lcl == 19);
  CHECK(spec.bins().back().ucl == 52);
  CHECK(spec.bins()[1].lcl == doctest::Approx(27.25));
  CHECK(spec.locate(52) == 3u);  // last bin includes its upper limit
  CHECK(spec.locate(19) == 0u);
  CHECK(spec.locate(27.25) == 1u);
  CHECK(!spec.locate(52.5));
  CHECK(!spec.locate(18));

  const std::vector<double> flat{7, 7, 7};
  const auto one = bin_numeric(flat);
  REQUIRE(one.size() == 1);
  CHECK(one.locate(7) == 0u);

  CHECK(bin_numeric(ages, BinRule::fixed_count(2)).size() == 2);
  CHECK_THROWS_AS(bin_numeric(std::vector<double>{}), DataError);
  CHECK_THROWS_AS(BinSpec({{0, 1}, {2, 3}}), DataError);
}

TEST_CASE("median thresholds") {
  CHECK(median_threshold(dist_of({0.2, 0, 0, 0.8})).median == doctest::Approx(0.1));
  CHECK(median_threshold(dist_of({0.8, 0.2})).median == doctest::Approx(0.5));
  CHECK(median_threshold(dist_of({0.5, 0.3, 0.2})).median == doctest::Approx(0.3));
  CHECK(median_threshold(dist_of({1.0})).median == 1.0);
  CHECK_THROWS_AS(median_threshold(dist_of({})), DataError);
}

TEST_CASE("census fixture distributions") {
  const auto t = census_fixture();
  const ClusterAssignment one(1, {1, 1, 1, 1, 1});
  const auto age = numeric_distribution(t, one, 1, "Age", BinRule::sturges());
  REQUIRE(age.entries.size() == 4);
  CHECK(age.entries[0].probability == doctest::Approx(0.2));
  CHECK(age.entries[1].probability == 0);
  CHECK(age.entries[2].probability == 0);
  CHECK(age.entries[3].probability == doctest::Approx(0.8));
  CHECK(median_threshold(age).median == doctest::Approx(0.1));

  const auto occ = categorical_probabilities(t, one, 1, "Occupation");
  REQUIRE(occ.entries.size() == 2);
  CHECK(*occ.probability_of(txt("Other-service")) == doctest::Approx(0.8));
  CHECK(*occ.probability_of(txt("Sales")) == doctest::Approx(0.2));
  CHECK(!occ.probability_of(missing()));
  CHECK(median_threshold(occ).median == doctest::Approx(0.5));

  const auto analysis = analyze(t, one, monitored_attributes(t.schema()), BinRule::sturges());
  const auto mask = flag_sensitive(t, one, analysis);
  CHECK(mask.record_flagged(0));
  CHECK(!mask.record_flagged(1));
  CHECK(mask.record_flagged(2));
  CHECK(mask.is_flagged(0, "Age"));
  CHECK(mask.is_flagged(0, "Sex"));
  CHECK(!mask.flag(0, "Marital status"));  // not monitored
  CHECK(mask.flagged_numeric().size() == 4);
  CHECK(mask.unflagged_numeric() == std::vector<CellRef>{{1, "Age"}});
}

TEST_CASE("Missing cells fail the conjunction") {
  const Schema s({numeric("x", AttributeRole::SensitiveNumeric), categorical("q", AttributeRole::QuasiCategorical)});
  const DataTable t(s, {{num(1), txt("a")}, {num(1), txt("a")}, {missing(), txt("a")}, {num(1), missing()}});
  const ClusterAssignment one(1, {1, 1, 1, 1});
  const auto analysis = analyze(t, one, monitored_attributes(s), BinRule::sturges());
  const auto mask = flag_sensitive(t, one, analysis);
  CHECK(mask.record_flagged(0));
  CHECK(mask.record_flagged(1));
  CHECK(!mask.record_flagged(2));
  CHECK(mask.flag(2, std::size_t{0}) == CellFlag::Missing);
  CHECK(mask.flag(2, std::size_t{1}) == CellFlag::Unflagged);
  CHECK(!mask.record_flagged(3));
}

TEST_CASE("and-policy names") {
  CHECK(parse_and_policy("universal") == AndPolicy::Universal);
  CHECK(parse_and_policy("pairwise") == AndPolicy::Pairwise);
  CHECK(parse_and_policy(to_string(AndPolicy::Pairwise)) == AndPolicy::Pairwise);
  CHECK_THROWS_AS(parse_and_policy("any"), DataError);
}

namespace {

DataTable random_table(std::mt19937_64& rng, std::size_t n) {
  const Schema s({numeric("age", AttributeRole::QuasiNumeric), numeric("balance", AttributeRole::SensitiveNumeric),
                  categorical("job", AttributeRole::SensitiveCategorical),
                  categorical("sex", AttributeRole::QuasiCategorical), numeric("other")});
  std::uniform_int_distribution<int> age(18, 90), pick(0, 3), miss(0, 19);
  std::normal_distribution<double> bal(1000, 800);
  const char* jobs[] = {"admin.", "technician", "services", "retired"};
  std::vector<Row> rows;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back({miss(rng) ? num(age(rng)) : missing(), miss(rng) ? num(std::round(bal(rng))) : missing(),
                    miss(rng) ? txt(jobs[pick(rng)]) : missing(), txt(pick(rng) % 2 ? "F" : "M"), num(pick(rng))});
  }
  return DataTable(s, std::move(rows));
}

ClusterAssignment random_assignment(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i < k ? i + 1 : rng() % k + 1;
  return ClusterAssignment(k, labels);
}

}  // namespace

TEST_CASE("oracle: class probabilities by brute recount") {
  std::mt19937_64 rng(17);
  const auto t = random_table(rng, 400);
  const auto a = random_assignment(rng, 400, 4);
  const auto analysis = analyze(t, a, monitored_attributes(t.schema()), BinRule::sturges());
  for (const auto& [key, dist] : analysis.distributions) {
    const auto [cluster, attribute] = key;
    const std::size_t col = t.schema().index_of(attribute);
    std::size_t total = 0;
    for (std::size_t r = 0; r < t.row_count(); ++r) total += a.label(r) == cluster && !t.at(r, col).is_missing();
    CHECK(dist.total == total);
    double sum = 0;
    for (const auto& e : dist.entries) {
      std::size_t hits = 0;
      for (std::size_t r = 0; r < t.row_count(); ++r) {
        const auto& v = t.at(r, col);
        if (a.label(r) != cluster || v.is_missing()) continue;
        if (dist.kind == AttributeKind::Numeric) {
          const auto& bin = dist.bins->bins()[std::get<std::size_t>(e.label)];
          const bool last = std::get<std::size_t>(e.label) + 1 == dist.bins->size();
          hits += v.as_numeric() >= bin.lcl && (v.as_numeric() < bin.ucl || (last && v.as_numeric() == bin.ucl));
        } else {
          hits += v.as_text() == std::get<std::string>(e.label);
        }
      }
      CHECK(e.count == hits);
      CHECK(e.probability == doctest::Approx(static_cast<double>(hits) / static_cast<double>(total)));
      sum += e.probability;
    }
    CHECK(sum == doctest::Approx(1.0));
    if (dist.kind == AttributeKind::Numeric) {
      CHECK(dist.entries.size() == (dist.bins->bins().front().lcl == dist.bins->bins().back().ucl
                                        ? 1
                                        : sturges_bin_count(total)));
    }
  }
}

TEST_CASE("property: mask views partition the non-Missing monitored cells") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const auto t = random_table(rng, 300);
    const auto a = random_assignment(rng, 300, 3 + trial);
    const auto analysis = analyze(t, a, monitored_attributes(t.schema()), BinRule::sturges());
    for (auto policy : {AndPolicy::Universal, AndPolicy::Pairwise}) {
      const auto mask = flag_sensitive(t, a, analysis, policy);
      std::set<CellRef> seen;
      std::size_t expected = 0;
      for (const auto& views : {mask.flagged_numeric(), mask.unflagged_numeric(), mask.flagged_categorical(),
                                mask.unflagged_categorical()}) {
        for (const auto& c : views) CHECK(seen.insert(c).second);
      }
      for (std::size_t r = 0; r < t.row_count(); ++r) {
        for (const auto& name : mask.attributes()) expected += !t.at(r, t.schema().index_of(name)).is_missing();
      }
      CHECK(seen.size() == expected);
      CHECK(mask.flagged_cell_count() == mask.flagged_numeric().size() + mask.flagged_categorical().size());
    }
  }
}

TEST_CASE("property: every universally flagged cell is also flagged pairwise") {
  std::mt19937_64 rng(29);
  const auto t = random_table(rng, 500);
  const auto a = random_assignment(rng, 500, 5);
  const auto analysis = analyze(t, a, monitored_attributes(t.schema()), BinRule::sturges());
  const auto uni = flag_sensitive(t, a, analysis, AndPolicy::Universal);
  const auto pair = flag_sensitive(t, a, analysis, AndPolicy::Pairwise);
  std::size_t flagged_records = 0;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    flagged_records += uni.record_flagged(r);
    for (std::size_t j = 0; j < uni.attributes().size(); ++j) {
      if (uni.flag(r, j) == CellFlag::Flagged) CHECK(pair.flag(r, j) == CellFlag::Flagged);
    }
    // universal flags whole records
    if (uni.record_flagged(r)) {
      for (std::size_t j = 0; j < uni.attributes().size(); ++j) CHECK(uni.flag(r, j) == CellFlag::Flagged);
    }
  }
  CHECK(flagged_records > 0);
  CHECK(pair.flagged_cell_count() >= uni.flagged_cell_count());
}

TEST_CASE("pairwise flags only passing sensitive-quasi pairs") {
  const Schema s({numeric("q", AttributeRole::QuasiNumeric), categorical("s1", AttributeRole::SensitiveCategorical),
                  categorical("s2", AttributeRole::SensitiveCategorical)});
  // q passes everywhere (constant), s1 = "a" passes (3/4), s2 = "x" passes (3/4)
  const DataTable t(s, {{num(1), txt("a"), txt("x")},
                        {num(1), txt("a"), txt("y")},
                        {num(1), txt("b"), txt("x")},
                        {num(1), txt("a"), txt("x")}});
  const ClusterAssignment one(1, {1, 1, 1, 1});
  const auto analysis = analyze(t, one, monitored_attributes(s), BinRule::sturges());
  const auto mask = flag_sensitive(t, one, analysis, AndPolicy::Pairwise);
  CHECK(mask.is_flagged(1, "q"));
  CHECK(mask.is_flagged(1, "s1"));
  CHECK(!mask.is_flagged(1, "s2"));
  CHECK(!mask.is_flagged(2, "s1"));
  CHECK(mask.is_flagged(2, "s2"));
  const auto uni = flag_sensitive(t, one, analysis, AndPolicy::Universal);
  CHECK(uni.record_flagged(0));
  CHECK(!uni.record_flagged(1));
  CHECK(!uni.record_flagged(2));
}

TEST_CASE("analysis json") {
  const auto t = census_fixture();
  const ClusterAssignment one(1, {1, 1, 1, 1, 1});
  const auto j = analyze(t, one, monitored_attributes(t.schema()), BinRule::sturges()).to_json();
  CHECK(j.size() == 5);
  for (const auto& d : j) CHECK(d.contains("threshold"));
}
