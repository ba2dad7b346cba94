#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "valfind/config.hpp"
#include "valfind/error.hpp"

using namespace valfind;
using namespace valfind::config;

namespace {

std::string error_of(std::string_view text) {
  try {
    Document::parse(text, "exp.toml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("Document: values, tables and comments") {
  const auto doc = Document::parse(R"(# experiment
top = "root"   # trailing comment
[boost]
eta = 0.1
rounds = 200
verify_objective = false
[tune]
eta = [0.05, 0.1, 3]
max_depth = [ 3,
  6 ]
[paths]
output = "out # not a comment"
)");
  CHECK(doc.find("top")->as_string("top") == "root");
  CHECK(doc.find("boost.eta")->as_real("boost.eta") == 0.1);
  CHECK(doc.find("boost.rounds")->as_int("boost.rounds") == 200);
  CHECK(doc.find("boost.rounds")->as_real("boost.rounds") == 200.0);
  CHECK_FALSE(doc.find("boost.verify_objective")->as_bool("x"));
  CHECK(doc.find("tune.eta")->as_real_list("tune.eta") == std::vector<double>{0.05, 0.1, 3.0});
  CHECK(doc.find("tune.max_depth")->as_int_list("m") == std::vector<long long>{3, 6});
  CHECK(doc.find("paths.output")->as_string("o") == "out # not a comment");
  CHECK(doc.find("boost.lambda") == nullptr);
  CHECK_THROWS_AS(doc.find("boost.eta")->as_string("boost.eta"), ConfigError);
}

TEST_CASE("Document: syntax errors carry source and line") {
  CHECK(error_of("a = 1\nb = \"open\n").rfind("exp.toml:2:", 0) == 0);
  CHECK(error_of("a = 1\na = 2\n").find("exp.toml:2: duplicate key") == 0);
  CHECK(error_of("[boost\n").find("exp.toml:1:") == 0);
  CHECK(error_of("x\n").find("expected 'key = value'") != std::string::npos);
  CHECK(error_of("x = [[1]]\n").find("nested") != std::string::npos);
  CHECK(error_of("x = nope\n").find("invalid value") != std::string::npos);
  CHECK(error_of("x = 1 2\n").find("trailing") != std::string::npos);
}

TEST_CASE("ExperimentConfig: defaults validate") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.synth_n == 657);
  CHECK(c.embed_dim == 256);
  CHECK(c.k_min == 2);
  CHECK(c.k_max == 15);
  CHECK(c.boost.eta == 0.3);
  CHECK(c.boost.max_depth == 6);
  CHECK(c.min_df == 2);
  CHECK(c.features == FeatureSelect::fused);
}

TEST_CASE("ExperimentConfig: file values overlay defaults") {
  ExperimentConfig c;
  c.apply(Document::parse(R"(
[boost]
eta = 0.1
max_depth = 4
[split]
ratios = [0.7, 0.15, 0.15]
[features]
select = "title"
)"));
  CHECK(c.boost.eta == 0.1);
  CHECK(c.boost.max_depth == 4);
  CHECK(c.boost.rounds == 100);
  CHECK(c.split_ratios.train == 0.7);
  CHECK(c.features == FeatureSelect::title);
  CHECK_THROWS_AS(c.apply(Document::parse("[boost]\netaa = 0.1\n")), ConfigError);
  CHECK_THROWS_AS(c.apply(Document::parse("[boost]\nrounds = \"many\"\n")), ConfigError);
  CHECK_THROWS_AS(c.apply(Document::parse("[features]\nselect = \"both\"\n")), ConfigError);
  CHECK_THROWS_AS(c.apply(Document::parse("[split]\nratios = [0.5, 0.5]\n")), ConfigError);
}

TEST_CASE("ExperimentConfig: invariants") {
  const auto bad = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  bad([](ExperimentConfig& c) { c.k_min = 1; });
  bad([](ExperimentConfig& c) { c.k_max = 1; });
  bad([](ExperimentConfig& c) { c.boost.eta = 2.0; });
  bad([](ExperimentConfig& c) { c.boost.lambda = -1.0; });
  bad([](ExperimentConfig& c) { c.birch_threshold = 0.0; });
  bad([](ExperimentConfig& c) { c.split_ratios = {0.5, 0.2, 0.2}; });
  bad([](ExperimentConfig& c) { c.target = "owner"; });
  bad([](ExperimentConfig& c) { c.model = "forest"; });
  bad([](ExperimentConfig& c) { c.top_k = 0; });
  bad([](ExperimentConfig& c) { c.grid.eta.clear(); });
  bad([](ExperimentConfig& c) { c.severity_levels = {"only"}; });
  bad([](ExperimentConfig& c) { c.output.clear(); });
}

TEST_CASE("ExperimentConfig: canonical TOML round-trips") {
  ExperimentConfig c;
  c.boost.eta = 0.123456789;
  c.grid.rounds = {10, 20, 40};
  c.findings = "data/a \"quoted\" path.jsonl";
  c.severity_levels = {"minor", "major"};
  c.features = FeatureSelect::description;
  const auto text = c.to_toml();
  ExperimentConfig back;
  back.apply(Document::parse(text));
  CHECK(back.to_toml() == text);
  CHECK(back.boost == c.boost);
  CHECK(back.findings == c.findings);
  CHECK(back.severity_levels == c.severity_levels);
}

TEST_CASE("output_dir appends the run id") {
  ExperimentConfig c;
  c.output = "runs";
  CHECK(c.output_dir() == std::filesystem::path("runs"));
  c.run_id = "exp1";
  CHECK(c.output_dir() == std::filesystem::path("runs") / "exp1");
}

TEST_CASE("load_grid: tuning grid files") {
  const auto dir = std::filesystem::temp_directory_path() / "valfind_grid_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "grid.toml") << "[tune]\neta = [0.05, 0.2]\nmax_depth = [2]\nrounds = [30]\nlambda = [0.5, 1]\n";
    std::ofstream(dir / "bad.toml") << "[boost]\neta = 0.1\n";
  }
  const auto g = load_grid(dir / "grid.toml");
  CHECK(g.eta == std::vector<double>{0.05, 0.2});
  CHECK(g.max_depth == std::vector<int>{2});
  CHECK(g.lambda == std::vector<double>{0.5, 1.0});
  CHECK_THROWS_AS(load_grid(dir / "bad.toml"), ConfigError);
  CHECK_THROWS_AS(load_grid(dir / "missing.toml"), ConfigError);
  std::filesystem::remove_all(dir);
}
