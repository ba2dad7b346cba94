#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "valfind/corpus.hpp"
#include "valfind/error.hpp"

using namespace valfind;
using namespace valfind::corpus;

namespace {

std::vector<Finding> read_jsonl(const std::string& text) {
  std::istringstream in(text);
  return read_findings(in, FileFormat::jsonl);
}

// Hamilton apportionment written out independently.
std::vector<std::size_t> hamilton(const std::vector<double>& shares, std::size_t n) {
  std::vector<std::size_t> out(shares.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double q = shares[i] * static_cast<double>(n);
    out[i] = static_cast<std::size_t>(std::floor(q));
    used += out[i];
    rem.push_back({q - std::floor(q), i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t j = 0; used < n; ++j, ++used) ++out[rem[j].second];
  return out;
}

std::set<std::string> ids(const std::vector<Finding>& v) {
  std::set<std::string> s;
  for (const auto& f : v) s.insert(f.id);
  return s;
}

}  // namespace

TEST_CASE("load_findings: empty input and minimal record") {
  CHECK(read_jsonl("").empty());
  const auto v = read_jsonl(R"({"id":"F1","title":"Stale data","description":"Inputs are old"})"
                            "\n");
  REQUIRE(v.size() == 1);
  CHECK(v[0].id == "F1");
  CHECK_FALSE(v[0].dimension.has_value());
  CHECK_FALSE(v[0].severity.has_value());
  CHECK_FALSE(v[0].model_category.has_value());
  CHECK_FALSE(v[0].finding_date.has_value());
  CHECK_FALSE(v[0].due_date.has_value());
  CHECK_FALSE(v[0].person_to_act.has_value());
  CHECK_FALSE(v[0].action_plan.has_value());
}

TEST_CASE("load_findings: misspelt dimension lists the valid names") {
  try {
    read_jsonl(R"({"id":"F1","title":"t","description":"d","dimension":"model_inputs"})");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("model_inputs") != std::string::npos);
    CHECK(msg.find("model_input") != std::string::npos);
    CHECK(msg.find("margin_of_conservatism") != std::string::npos);
  }
}

TEST_CASE("load_findings: invariant violations are data errors") {
  CHECK_THROWS_AS(read_jsonl(R"({"id":"F1","title":"","description":"d"})"), DataError);
  CHECK_THROWS_AS(read_jsonl(R"({"id":"F1","title":"t","description":"d"})"
                             "\n"
                             R"({"id":"F1","title":"t","description":"d"})"),
                  DataError);
  CHECK_THROWS_AS(read_jsonl(R"({"id":"F1","title":"t","description":"d","severity":"extreme"})"),
                  DataError);
  CHECK_THROWS_AS(read_jsonl(R"({"id":"F1","title":"t","description":"d",)"
                             R"("finding_date":"2023-05-10","due_date":"2023-05-09"})"),
                  DataError);
  CHECK_THROWS_AS(read_jsonl(R"({"id":"F1","title":"t","description":"d","model_category":"CCF"})"),
                  DataError);
  CHECK_THROWS_AS(read_jsonl("{not json"), DataError);
}

TEST_CASE("Date: parsing and epoch arithmetic") {
  CHECK(Date::parse("2024-02-29").to_string() == "2024-02-29");
  CHECK_THROWS_AS(Date::parse("2023-02-29"), DataError);
  CHECK_THROWS_AS(Date::parse("2023-2-01"), DataError);
  CHECK(Date::parse("1970-01-01").days_since_epoch() == 0);
  CHECK(Date::parse("2000-03-01").days_since_epoch() == 11017);
  for (long long d : {-1000LL, 0LL, 59LL, 11016LL, 20000LL}) {
    CHECK(Date::from_days_since_epoch(d).days_since_epoch() == d);
  }
}

TEST_CASE("SeverityScale: ranks and minimum size") {
  SeverityScale s;
  CHECK(s.rank("low") == 0);
  CHECK(s.rank("high") == 2);
  CHECK_THROWS_AS(s.rank("none"), DataError);
  CHECK_THROWS(SeverityScale({"only"}));
}

TEST_CASE("findings round-trip through JSONL and CSV") {
  Finding full;
  full.id = "F-7";
  full.title = "Quoted \"title\", with comma";
  full.description = "Line one\nline two";
  full.dimension = Dimension::margin_of_conservatism;
  full.severity = "high";
  full.model_category = ModelCategory::LGD;
  full.finding_date = Date::parse("2022-01-15");
  full.due_date = Date::parse("2022-06-30");
  full.person_to_act = "Model owner";
  full.action_plan = "Recalibrate";
  Finding bare;
  bare.id = "F-8";
  bare.title = "t";
  bare.description = "d";
  const std::vector<Finding> corpus{full, bare};
  for (auto fmt : {FileFormat::jsonl, FileFormat::csv}) {
    std::ostringstream out;
    write_findings(out, corpus, fmt);
    std::istringstream in(out.str());
    CHECK(read_findings(in, fmt) == corpus);
  }
}

TEST_CASE("largest_remainder apportions exactly") {
  CHECK(largest_remainder(std::vector<double>{0.5, 0.5}, 3) == std::vector<std::size_t>{2, 1});
  std::mt19937_64 gen(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> w(1 + gen() % 9);
    double s = 0.0;
    for (auto& x : w) s += (x = 0.01 + static_cast<double>(gen() % 1000));
    for (auto& x : w) x /= s;
    const std::size_t n = gen() % 1000;
    const auto got = largest_remainder(w, n);
    CHECK(got == hamilton(w, n));
  }
}

TEST_CASE("synthetic corpus: 657 findings with apportioned dimension counts") {
  SyntheticOptions opt;
  const auto corpus = generate_synthetic_corpus(opt);
  REQUIRE(corpus.size() == 657);
  std::vector<double> shares;
  for (const auto& [d, s] : opt.profile) shares.push_back(s);
  const auto expected = hamilton(shares, 657);
  std::map<Dimension, std::size_t> counts;
  for (const auto& f : corpus) ++counts[*f.dimension];
  for (std::size_t i = 0; i < opt.profile.size(); ++i) {
    CHECK(counts[opt.profile[i].first] == expected[i]);
  }
  CHECK_NOTHROW(validate(corpus));
}

TEST_CASE("synthetic corpus: n=1 takes the most probable label") {
  SyntheticOptions opt;
  opt.n = 1;
  const auto one = generate_synthetic_corpus(opt);
  REQUIRE(one.size() == 1);
  const auto top = std::max_element(opt.profile.begin(), opt.profile.end(),
                                    [](auto a, auto b) { return a.second < b.second; });
  CHECK(*one[0].dimension == top->first);
}

TEST_CASE("synthetic corpus: deterministic per seed") {
  SyntheticOptions opt;
  opt.n = 200;
  std::ostringstream a, b, c;
  write_findings(a, generate_synthetic_corpus(opt), FileFormat::jsonl);
  write_findings(b, generate_synthetic_corpus(opt), FileFormat::jsonl);
  opt.seed = 2;
  write_findings(c, generate_synthetic_corpus(opt), FileFormat::jsonl);
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
}

TEST_CASE("stratified_split: published subset sizes") {
  const auto corpus = generate_synthetic_corpus({});
  const auto s = stratified_split(corpus, {}, StratifyOn::dimension, 1);
  CHECK(s.train.size() == 394);
  CHECK(s.valid.size() == 132);
  CHECK(s.test.size() == 131);
}

TEST_CASE("stratified_split: ten findings in one stratum") {
  SyntheticOptions opt;
  opt.n = 10;
  opt.profile = {{Dimension::documentation, 1.0}};
  const auto s = stratified_split(generate_synthetic_corpus(opt), {}, StratifyOn::dimension, 3);
  CHECK(s.train.size() == 6);
  CHECK(s.valid.size() == 2);
  CHECK(s.test.size() == 2);
}

TEST_CASE("stratified_split: partition, proportions and order independence") {
  SyntheticOptions opt;
  opt.n = 300;
  auto corpus = generate_synthetic_corpus(opt);
  std::map<Dimension, double> global;
  for (const auto& f : corpus) global[*f.dimension] += 1.0;
  const SplitRatios r{0.6, 0.2, 0.2};
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto s = stratified_split(corpus, r, StratifyOn::dimension, seed);
    auto all = ids(s.train);
    const auto va = ids(s.valid), te = ids(s.test);
    CHECK(all.size() + va.size() + te.size() == corpus.size());
    all.insert(va.begin(), va.end());
    all.insert(te.begin(), te.end());
    CHECK(all == ids(corpus));
    const std::vector<std::pair<const std::vector<Finding>*, double>> parts{
        {&s.train, r.train}, {&s.valid, r.valid}, {&s.test, r.test}};
    for (const auto& [part, ratio] : parts) {
      std::map<Dimension, double> c;
      for (const auto& f : *part) c[*f.dimension] += 1.0;
      for (const auto& [d, n] : global) CHECK(std::abs(c[d] - ratio * n) <= 1.0);
    }
    std::vector<Finding> shuffled = corpus;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(seed));
    const auto t = stratified_split(shuffled, r, StratifyOn::dimension, seed);
    CHECK(ids(t.train) == ids(s.train));
    CHECK(ids(t.valid) == ids(s.valid));
    CHECK(ids(t.test) == ids(s.test));
  }
}

TEST_CASE("SplitRatios: parsing and validation") {
  const auto r = SplitRatios::parse("0.7,0.15,0.15");
  CHECK(r.train == doctest::Approx(0.7));
  CHECK_THROWS(SplitRatios::parse("0.7,0.3"));
  CHECK_THROWS(SplitRatios::parse("0.5,0.2,0.2"));
  CHECK_THROWS(SplitRatios::parse("1,0,0"));
}
