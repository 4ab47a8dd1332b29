#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "fuzzanon/clustering.hpp"
#include "fuzzanon/error.hpp"
#include "support.hpp"

using namespace fuzzanon;
using namespace testing;

namespace {

using Groups = std::vector<std::vector<std::size_t>>;

double sse(const FeatureMatrix& f, const std::vector<std::size_t>& members) {
  double total = 0;
  for (std::size_t j = 0; j < f.cols(); ++j) {
    double mean = 0;
    for (auto i : members) mean += f(i, j);
    mean /= static_cast<double>(members.size());
    for (auto i : members) total += (f(i, j) - mean) * (f(i, j) - mean);
  }
  return total;
}

// Canonical form: groups sorted internally and by their smallest member.
Groups canonical(Groups g) {
  for (auto& m : g) std::sort(m.begin(), m.end());
  std::sort(g.begin(), g.end());
  return g;
}

Groups groups_of(const ClusterAssignment& a) {
  Groups g;
  for (std::size_t c = 1; c <= a.k(); ++c) g.push_back(a.members(c));
  return canonical(g);
}

// Textbook agglomeration: at each step merge the pair whose union raises the total SSE least,
// computed directly from the members.
std::vector<std::pair<Groups, double>> brute_ward(const FeatureMatrix& f) {
  Groups g;
  for (std::size_t i = 0; i < f.rows(); ++i) g.push_back({i});
  std::vector<std::pair<Groups, double>> trace;
  while (g.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      for (std::size_t b = a + 1; b < g.size(); ++b) {
        auto u = g[a];
        u.insert(u.end(), g[b].begin(), g[b].end());
        const double delta = sse(f, u) - sse(f, g[a]) - sse(f, g[b]);
        if (delta < best) {
          best = delta;
          ba = a;
          bb = b;
        }
      }
    }
    g[ba].insert(g[ba].end(), g[bb].begin(), g[bb].end());
    g.erase(g.begin() + static_cast<std::ptrdiff_t>(bb));
    trace.emplace_back(canonical(g), best);
  }
  return trace;
}

FeatureMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n * d);
  for (auto& x : v) x = normal(rng);
  return FeatureMatrix(n, d, v);
}

}  // namespace

TEST_CASE("feature matrix standardization") {
  const Schema s({numeric("a", AttributeRole::QuasiNumeric), numeric("b", AttributeRole::SensitiveNumeric),
                  categorical("c", AttributeRole::SensitiveCategorical), numeric("d")});
  const DataTable t(s, {{num(1), num(7), txt("x"), num(0)},
                        {num(3), num(7), txt("y"), num(1)},
                        {missing(), num(7), txt("z"), num(2)}});
  CHECK(default_feature_selection(s) == std::vector<std::string>{"a", "b"});
  const auto f = feature_matrix(t);
  REQUIRE(f.rows() == 3);
  REQUIRE(f.cols() == 2);
  CHECK(f(0, 0) == doctest::Approx(-1));
  CHECK(f(1, 0) == doctest::Approx(1));
  CHECK(f(2, 0) == 0);  // Missing
  for (std::size_t i = 0; i < 3; ++i) CHECK(f(i, 1) == 0);  // constant column
  CHECK_THROWS_AS(feature_matrix(t, {"c"}), DataError);
  CHECK_THROWS_AS(feature_matrix(t, {"nope"}), DataError);
  CHECK(feature_matrix(t, {"d"}).cols() == 1);
}

TEST_CASE("cluster assignment validation") {
  CHECK_THROWS_AS(ClusterAssignment(2, {1, 1, 1}), DataError);
  CHECK_THROWS_AS(ClusterAssignment(2, {1, 3}), DataError);
  CHECK_THROWS_AS(ClusterAssignment(1, {0}), DataError);
  const ClusterAssignment a(2, {2, 1, 2});
  CHECK(a.sizes() == std::vector<std::size_t>{1, 2});
  CHECK(a.members(2) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("two well-separated groups") {
  const FeatureMatrix f(6, 1, {0.0, 0.1, 0.2, 10.0, 10.1, 10.2});
  const auto r = ward_cluster(f, 2);
  CHECK(r.assignment.labels() == std::vector<std::size_t>{1, 1, 1, 2, 2, 2});
  REQUIRE(r.merges.size() == 5);
  // final merge cost: 3*3/6 * 10^2
  CHECK(r.merges.back().cost == doctest::Approx(150.0));
}

TEST_CASE("k = 1 and k = n") {
  std::mt19937_64 rng(3);
  const auto f = random_matrix(rng, 9, 2);
  const auto one = ward_cluster(f, 1);
  CHECK(std::all_of(one.assignment.labels().begin(), one.assignment.labels().end(),
                    [](std::size_t l) { return l == 1; }));
  const auto all = ward_cluster(f, 9);
  std::vector<std::size_t> expected(9);
  std::iota(expected.begin(), expected.end(), 1);
  CHECK(all.assignment.labels() == expected);
  CHECK_THROWS_AS(ward_cluster(f, 0), DataError);
  CHECK_THROWS_AS(ward_cluster(f, 10), DataError);
}

TEST_CASE("oracle: brute-force 2-partition on separated data") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 8;
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) {
      const double centre = (rng() % 2) ? 5.0 : -5.0;
      v.push_back(centre + noise(rng));
      v.push_back(noise(rng));
    }
    const FeatureMatrix f(n, 2, v);
    double best = std::numeric_limits<double>::infinity();
    Groups best_groups;
    for (unsigned mask = 1; mask < (1u << n) - 1; ++mask) {
      if (!(mask & 1u)) continue;
      Groups g(2);
      for (std::size_t i = 0; i < n; ++i) g[(mask >> i) & 1u ? 0 : 1].push_back(i);
      const double total = sse(f, g[0]) + sse(f, g[1]);
      if (total < best) {
        best = total;
        best_groups = canonical(g);
      }
    }
    CHECK(groups_of(ward_cluster(f, 2).assignment) == best_groups);
  }
}

TEST_CASE("oracle: greedy Ward trace from direct SSE") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const std::size_t d = 1 + trial % 3;
    const auto f = random_matrix(rng, n, d);
    const auto trace = brute_ward(f);
    const auto merges = ward_dendrogram(f);
    REQUIRE(merges.size() == n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
      const std::size_t k = n - step - 1;
      CHECK(groups_of(cut_dendrogram(merges, n, k)) == trace[step].first);
      CHECK(merges[step].cost == doctest::Approx(trace[step].second).epsilon(1e-9));
    }
  }
}

TEST_CASE("property: merge costs sum to the total SSE and are non-decreasing") {
  std::mt19937_64 rng(5);
  const auto f = random_matrix(rng, 200, 3);
  const auto merges = ward_dendrogram(f);
  std::vector<std::size_t> all(200);
  std::iota(all.begin(), all.end(), 0);
  double total = 0;
  for (std::size_t i = 0; i < merges.size(); ++i) {
    total += merges[i].cost;
    if (i) CHECK(merges[i - 1].cost <= merges[i].cost);
    CHECK(merges[i].merged == 200 + i);
    CHECK(merges[i].left < merges[i].merged);
    CHECK(merges[i].right < merges[i].merged);
  }
  CHECK(total == doctest::Approx(sse(f, all)));
}

TEST_CASE("property: determinism") {
  std::mt19937_64 rng(8);
  const auto f = random_matrix(rng, 300, 4);
  const auto a = ward_cluster(f, 5);
  const auto b = ward_cluster(f, 5);
  CHECK(a.assignment == b.assignment);
  CHECK(a.merges == b.merges);
}

TEST_CASE("property: positive rescaling of a raw column does not change the clustering") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(40, 12);
  const Schema s({numeric("age", AttributeRole::QuasiNumeric), numeric("balance", AttributeRole::SensitiveNumeric)});
  std::vector<Row> rows, scaled;
  for (int i = 0; i < 120; ++i) {
    const double a = normal(rng), b = normal(rng) * 100;
    rows.push_back({num(a), num(b)});
    scaled.push_back({num(a * 365.25 + 3), num(b / 1000)});
  }
  const auto x = ward_cluster(feature_matrix(DataTable(s, rows)), 4);
  const auto y = ward_cluster(feature_matrix(DataTable(s, scaled)), 4);
  CHECK(x.assignment == y.assignment);
}

TEST_CASE("identical points are still partitioned") {
  const FeatureMatrix f(5, 1, {1, 1, 1, 1, 1});
  const auto r = ward_cluster(f, 3);
  CHECK(r.assignment.k() == 3);
  for (const auto& m : r.merges) CHECK(m.cost == 0);
}

TEST_CASE("cut_dendrogram rejects malformed histories") {
  const std::vector<MergeStep> bad{{0, 1, 3, 1.0}, {0, 2, 4, 2.0}};
  CHECK_THROWS_AS(cut_dendrogram(bad, 3, 1), DataError);
  const std::vector<MergeStep> short_history{{0, 1, 3, 1.0}};
  CHECK_THROWS_AS(cut_dendrogram(short_history, 3, 1), DataError);
  const std::vector<MergeStep> good{{0, 2, 3, 1.0}, {1, 3, 4, 2.0}};
  CHECK(cut_dendrogram(good, 3, 2).labels() == std::vector<std::size_t>{1, 2, 1});
  const auto j = dendrogram_to_json(good);
  CHECK(j.size() == 2);
}
