#include "fuzzanon/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fuzzanon::synthetic {

namespace {

// mt19937_64 output is fixed by the standard; the transforms below avoid
// std:: distributions so generated files match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  long long between(long long lo, long long hi) {
    return lo + static_cast<long long>(uniform() * static_cast<double>(hi - lo + 1));
  }

  double normal(double mean, double sd) {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  bool chance(double p) { return uniform() < p; }

  struct Choice {
    const char* label;
    double weight;
  };

  // nullptr label means Missing.
  const char* pick(std::span<const Choice> choices) {
    double total = 0;
    for (const auto& c : choices) total += c.weight;
    double x = uniform() * total;
    for (const auto& c : choices) {
      if (x < c.weight) return c.label;
      x -= c.weight;
    }
    return choices.back().label;
  }

 private:
  std::mt19937_64 eng_;
};

using Choice = Rng::Choice;

CellValue num(double v) { return CellValue::numeric(v); }
CellValue txt(const char* s) { return s ? CellValue::text(s) : CellValue::missing(); }

Attribute attr(std::string name, AttributeRole role, AttributeKind kind, std::optional<std::string> token = {}) {
  Attribute a;
  a.name = std::move(name);
  a.role = role;
  a.kind = kind;
  a.token = std::move(token);
  return a;
}

long long clamp_round(double v, long long lo, long long hi) {
  return std::clamp(static_cast<long long>(std::llround(v)), lo, hi);
}

constexpr Choice kWorkclass[] = {{"Private", 69.7},     {"Self-emp-not-inc", 7.8}, {"Local-gov", 6.4},
                                 {nullptr, 5.6},        {"State-gov", 4.0},        {"Self-emp-inc", 3.4},
                                 {"Federal-gov", 2.9},  {"Without-pay", 0.05},     {"Never-worked", 0.02}};

struct Education {
  const char* label;
  int years;
  double weight;
};
constexpr Education kEducation[] = {
    {"HS-grad", 9, 32.3},     {"Some-college", 10, 22.4}, {"Bachelors", 13, 16.4}, {"Masters", 14, 5.3},
    {"Assoc-voc", 11, 4.2},   {"11th", 7, 3.6},           {"Assoc-acdm", 12, 3.3}, {"10th", 6, 2.9},
    {"7th-8th", 4, 2.0},      {"Prof-school", 15, 1.8},   {"9th", 5, 1.6},         {"12th", 8, 1.3},
    {"Doctorate", 16, 1.3},   {"5th-6th", 3, 1.0},        {"1st-4th", 2, 0.5},     {"Preschool", 1, 0.2}};

constexpr Choice kOccupation[] = {{"Prof-specialty", 12.7},   {"Craft-repair", 12.6},     {"Exec-managerial", 12.5},
                                  {"Adm-clerical", 11.6},     {"Sales", 11.2},            {"Other-service", 10.1},
                                  {"Machine-op-inspct", 6.1}, {nullptr, 5.7},             {"Transport-moving", 4.9},
                                  {"Handlers-cleaners", 4.2}, {"Farming-fishing", 3.0},   {"Tech-support", 2.8},
                                  {"Protective-serv", 2.0},   {"Priv-house-serv", 0.5},   {"Armed-Forces", 0.03}};

constexpr Choice kRace[] = {{"White", 85.4},
                            {"Black", 9.6},
                            {"Asian-Pac-Islander", 3.2},
                            {"Amer-Indian-Eskimo", 1.0},
                            {"Other", 0.8}};

constexpr Choice kCountry[] = {{"United-States", 89.6}, {"Mexico", 2.0},      {nullptr, 1.8},       {"Philippines", 0.6},
                               {"Germany", 0.4},        {"Canada", 0.4},      {"Puerto-Rico", 0.35}, {"El-Salvador", 0.3},
                               {"India", 0.3},          {"Cuba", 0.3},        {"England", 0.3},     {"Jamaica", 0.25},
                               {"South", 0.25},         {"China", 0.23},      {"Italy", 0.22},      {"Dominican-Republic", 0.21},
                               {"Vietnam", 0.2},        {"Guatemala", 0.2},   {"Japan", 0.19},      {"Poland", 0.18}};

}  // namespace

Schema adults_schema() {
  using R = AttributeRole;
  using K = AttributeKind;
  return Schema({attr("age", R::QuasiNumeric, K::Numeric),
                 attr("workclass", R::NonSensitive, K::Categorical),
                 attr("fnlwgt", R::NonSensitive, K::Numeric),
                 attr("education", R::NonSensitive, K::Categorical),
                 attr("education-num", R::NonSensitive, K::Numeric),
                 attr("marital-status", R::NonSensitive, K::Categorical),
                 attr("occupation", R::SensitiveCategorical, K::Categorical),
                 attr("relationship", R::NonSensitive, K::Categorical),
                 attr("race", R::SensitiveCategorical, K::Categorical),
                 attr("sex", R::QuasiCategorical, K::Categorical, "Person"),
                 attr("capital-gain", R::NonSensitive, K::Numeric),
                 attr("capital-loss", R::NonSensitive, K::Numeric),
                 attr("hours-per-week", R::NonSensitive, K::Numeric),
                 attr("native-country", R::NonSensitive, K::Categorical),
                 attr("income", R::SensitiveCategorical, K::Categorical)});
}

Schema bank_schema() {
  using R = AttributeRole;
  using K = AttributeKind;
  return Schema({attr("age", R::QuasiNumeric, K::Numeric),
                 attr("job", R::SensitiveCategorical, K::Categorical),
                 attr("marital", R::NonSensitive, K::Categorical),
                 attr("education", R::NonSensitive, K::Categorical),
                 attr("default", R::NonSensitive, K::Categorical),
                 attr("balance", R::SensitiveNumeric, K::Numeric),
                 attr("housing", R::NonSensitive, K::Categorical),
                 attr("loan", R::SensitiveCategorical, K::Categorical),
                 attr("contact", R::Identifier, K::Categorical),
                 attr("day", R::NonSensitive, K::Numeric),
                 attr("month", R::NonSensitive, K::Categorical),
                 attr("duration", R::NonSensitive, K::Numeric),
                 attr("campaign", R::NonSensitive, K::Numeric),
                 attr("pdays", R::NonSensitive, K::Numeric),
                 attr("previous", R::NonSensitive, K::Numeric),
                 attr("poutcome", R::NonSensitive, K::Categorical),
                 attr("y", R::NonSensitive, K::Categorical)});
}

DataTable adults(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Row> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    // Skewed working-age population.
    const double u = rng.uniform();
    const long long age = u < 0.35 ? clamp_round(rng.normal(26, 5), 17, 90)
                             : (u < 0.85 ? clamp_round(rng.normal(42, 9), 17, 90) : clamp_round(rng.normal(62, 9), 17, 90));

    double edu_total = 0;
    for (const auto& e : kEducation) edu_total += e.weight;
    double x = rng.uniform() * edu_total;
    const Education* edu = &kEducation[0];
    for (const auto& e : kEducation) {
      if (x < e.weight) {
        edu = &e;
        break;
      }
      x -= e.weight;
    }

    const bool male = rng.chance(0.67);
    const char* relationship;
    static constexpr Choice young[] = {{"Never-married", 85}, {"Married-civ-spouse", 11}, {"Divorced", 2}, {"Separated", 2}};
    static constexpr Choice mid[] = {{"Married-civ-spouse", 52}, {"Never-married", 22}, {"Divorced", 17}, {"Separated", 4},
                                     {"Married-spouse-absent", 1.5}, {"Widowed", 2}, {"Married-AF-spouse", 0.1}};
    static constexpr Choice old[] = {{"Married-civ-spouse", 58}, {"Widowed", 18}, {"Divorced", 15}, {"Never-married", 6},
                                     {"Separated", 2}, {"Married-spouse-absent", 1}};
    const char* marital = rng.pick(age < 25 ? std::span<const Choice>(young) : (age < 55 ? std::span<const Choice>(mid) : std::span<const Choice>(old)));
    const std::string ms = marital;
    if (ms == "Married-civ-spouse" || ms == "Married-AF-spouse") {
      relationship = male ? "Husband" : "Wife";
    } else if (age < 25) {
      static constexpr Choice r[] = {{"Own-child", 60}, {"Not-in-family", 30}, {"Other-relative", 7}, {"Unmarried", 3}};
      relationship = rng.pick(r);
    } else {
      static constexpr Choice r[] = {{"Not-in-family", 55}, {"Unmarried", 30}, {"Own-child", 8}, {"Other-relative", 7}};
      relationship = rng.pick(r);
    }

    const char* workclass = rng.pick(kWorkclass);
    const char* occupation = workclass ? rng.pick(kOccupation) : nullptr;
    if (!workclass && occupation) occupation = nullptr;
    if (workclass && !occupation && rng.chance(0.9)) occupation = "Other-service";

    const double fnl = std::exp(rng.normal(12.0, 0.45));
    const long long fnlwgt = clamp_round(fnl, 12285, 1484705);

    const double hrs = rng.chance(0.47) ? 40.0 : rng.normal(age < 22 || age > 65 ? 28 : 44, 11);
    const long long hours = clamp_round(hrs, 1, 99);

    double rich = -2.2 + 0.28 * (edu->years - 9) + (male ? 0.8 : 0.0) + (ms == "Married-civ-spouse" ? 1.3 : 0.0) +
                  (age > 30 && age < 60 ? 0.6 : -0.4) + (hours > 45 ? 0.4 : 0.0);
    const bool high = rng.uniform() < 1.0 / (1.0 + std::exp(-rich));

    long long gain = 0;
    long long loss = 0;
    if (rng.chance(high ? 0.2 : 0.04)) {
      static constexpr long long gains[] = {15024, 7688, 7298, 99999, 5178, 3103, 4386, 5013, 2174, 3325, 8614, 4650};
      gain = gains[rng.between(0, 11)];
    } else if (rng.chance(high ? 0.1 : 0.03)) {
      static constexpr long long losses[] = {1902, 1977, 1887, 1848, 1485, 1602, 1740, 1590, 1876, 1672};
      loss = losses[rng.between(0, 9)];
    }

    Row row;
    row.reserve(15);
    row.push_back(num(static_cast<double>(age)));
    row.push_back(txt(workclass));
    row.push_back(num(static_cast<double>(fnlwgt)));
    row.push_back(txt(edu->label));
    row.push_back(num(edu->years));
    row.push_back(txt(marital));
    row.push_back(txt(occupation));
    row.push_back(txt(relationship));
    row.push_back(txt(rng.pick(kRace)));
    row.push_back(txt(male ? "Male" : "Female"));
    row.push_back(num(static_cast<double>(gain)));
    row.push_back(num(static_cast<double>(loss)));
    row.push_back(num(static_cast<double>(hours)));
    row.push_back(txt(rng.pick(kCountry)));
    row.push_back(txt(high ? ">50K" : "<=50K"));
    out.push_back(std::move(row));
  }
  return DataTable(adults_schema(), std::move(out));
}

DataTable bank(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  static constexpr Choice kJob[] = {{"management", 21.4}, {"blue-collar", 20.9}, {"technician", 16.9}, {"admin.", 10.6},
                                    {"services", 9.2},    {"retired", 5.1},      {"self-employed", 4.0}, {"entrepreneur", 3.7},
                                    {"unemployed", 2.8},  {"housemaid", 2.5},    {"student", 1.9},     {"unknown", 0.9}};
  static constexpr Choice kMonth[] = {{"may", 30.9}, {"jul", 15.5}, {"aug", 14.0}, {"jun", 11.8}, {"nov", 8.7}, {"apr", 6.5},
                                      {"feb", 4.7},  {"jan", 3.3},  {"oct", 1.8},  {"sep", 1.1},  {"mar", 1.1}, {"dec", 0.4}};
  static constexpr Choice kContact[] = {{"cellular", 64.1}, {"unknown", 29.3}, {"telephone", 6.6}};
  static constexpr Choice kEdu[] = {{"secondary", 51.0}, {"tertiary", 29.9}, {"primary", 15.0}, {"unknown", 4.1}};
  static constexpr Choice kPoutcome[] = {{"failure", 10.8}, {"other", 4.4}, {"success", 2.9}};

  std::vector<Row> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const char* job = rng.pick(kJob);
    const std::string js = job;
    long long age;
    if (js == "retired") age = clamp_round(rng.normal(63, 8), 35, 95);
    else if (js == "student") age = clamp_round(rng.normal(25, 4), 18, 40);
    else age = clamp_round(rng.normal(40, 9.5), 19, 70);

    static constexpr Choice married_old[] = {{"married", 65}, {"divorced", 14}, {"single", 21}};
    static constexpr Choice married_young[] = {{"single", 60}, {"married", 37}, {"divorced", 3}};
    const char* marital = rng.pick(age < 30 ? std::span<const Choice>(married_young) : std::span<const Choice>(married_old));

    // Heavy right tail with a small negative share.
    double bal;
    const double u = rng.uniform();
    if (u < 0.08) bal = -rng.uniform() * 1500.0;
    else if (u < 0.15) bal = rng.uniform() * 50.0;
    else bal = std::exp(rng.normal(6.6 + (age > 55 ? 0.6 : 0.0), 1.3));
    const long long balance = clamp_round(bal, -3313, 71188);

    const bool housing = rng.chance(age < 55 ? 0.62 : 0.3);
    const bool loan = rng.chance(js == "entrepreneur" || js == "blue-collar" ? 0.22 : 0.13);
    const bool dflt = rng.chance(0.017);

    const long long day = rng.between(1, 31);
    const long long duration = clamp_round(std::exp(rng.normal(5.2, 0.8)), 4, 3025);
    const long long campaign = clamp_round(1.0 + std::floor(-std::log(1.0 - rng.uniform()) * 1.8), 1, 50);
    long long pdays = -1;
    long long previous = 0;
    const char* poutcome = "unknown";
    if (rng.chance(0.18)) {
      pdays = rng.between(1, 871);
      previous = rng.between(1, 25) > 20 ? rng.between(5, 25) : rng.between(1, 4);
      poutcome = rng.pick(kPoutcome);
    }
    const double z = -2.6 + (duration > 400 ? 1.8 : 0.0) + (std::string(poutcome) == "success" ? 2.2 : 0.0) +
                     (housing ? -0.5 : 0.0) + (js == "retired" || js == "student" ? 0.7 : 0.0);
    const bool subscribed = rng.uniform() < 1.0 / (1.0 + std::exp(-z));

    Row row;
    row.reserve(17);
    row.push_back(num(static_cast<double>(age)));
    row.push_back(txt(job));
    row.push_back(txt(marital));
    row.push_back(txt(rng.pick(kEdu)));
    row.push_back(txt(dflt ? "yes" : "no"));
    row.push_back(num(static_cast<double>(balance)));
    row.push_back(txt(housing ? "yes" : "no"));
    row.push_back(txt(loan ? "yes" : "no"));
    row.push_back(txt(rng.pick(kContact)));
    row.push_back(num(static_cast<double>(day)));
    row.push_back(txt(rng.pick(kMonth)));
    row.push_back(num(static_cast<double>(duration)));
    row.push_back(num(static_cast<double>(campaign)));
    row.push_back(num(static_cast<double>(pdays)));
    row.push_back(num(static_cast<double>(previous)));
    row.push_back(txt(poutcome));
    row.push_back(txt(subscribed ? "yes" : "no"));
    out.push_back(std::move(row));
  }
  return DataTable(bank_schema(), std::move(out));
}

}  // namespace fuzzanon::synthetic
