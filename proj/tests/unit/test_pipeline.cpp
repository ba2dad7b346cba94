#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "valfind/corpus.hpp"
#include "valfind/csv.hpp"
#include "valfind/dimassign.hpp"
#include "valfind/error.hpp"
#include "valfind/numfmt.hpp"
#include "valfind/pipeline.hpp"

using namespace valfind;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("valfind_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

config::ExperimentConfig small_config(const fs::path& dir) {
  config::ExperimentConfig c;
  c.output = dir.string();
  c.synth_n = 150;
  c.embed_dim = 16;
  c.k_max = 5;
  c.boost.rounds = 8;
  c.boost.max_depth = 3;
  c.logreg.epochs = 40;
  c.grid = {.eta = {0.3}, .max_depth = {2, 3}, .rounds = {4, 8}, .lambda = {1.0}};
  c.threads = 1;
  return c;
}

std::vector<csv::Record> read_csv(const fs::path& p) {
  std::ifstream in(p);
  return csv::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("run_stage: missing upstream artifacts name the stage to run") {
  const auto dir = scratch("missing");
  std::ostringstream log;
  try {
    pipeline::run_stage(small_config(dir), "split", log);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("synth") != std::string::npos);
  }
  CHECK_THROWS_AS(pipeline::run_stage(small_config(dir), "eval", log), DataError);
  fs::remove_all(dir);
}

TEST_CASE("run_stage: configuration errors come before any write") {
  const auto dir = scratch("badcfg");
  std::ostringstream log;
  auto c = small_config(dir);
  c.boost.eta = -1;
  CHECK_THROWS_AS(pipeline::run_stage(c, "synth", log), ConfigError);
  CHECK_THROWS_AS(pipeline::run_stage(small_config(dir), "cluster-all", log), ConfigError);
  auto missing = small_config(dir);
  missing.findings = (dir / "nowhere.jsonl").string();
  CHECK_THROWS_AS(pipeline::run_stage(missing, "ingest", log), ConfigError);
  CHECK_FALSE(fs::exists(dir / "manifest.json"));
  CHECK_FALSE(fs::exists(dir / "findings.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("render_report: placeholders for absent stages") {
  const auto dir = scratch("empty");
  fs::create_directories(dir);
  const auto md = pipeline::render_report(dir);
  for (auto stage : {"run `valfind synth`", "run `valfind sweep`", "run `valfind assign --method majority`",
                     "run `valfind assign --method share`", "run `valfind eval`", "run `valfind attribute`"}) {
    CHECK_MESSAGE(md.find(stage) != std::string::npos, stage);
  }
  fs::remove_all(dir);
}

TEST_CASE("run_all: small end-to-end run, schemas, caching and parse-back") {
  const auto dir = scratch("full");
  const auto cfg = small_config(dir);
  std::ostringstream log;
  const auto first = pipeline::run_all(cfg, log);
  for (const auto& r : first) CHECK_FALSE(r.cached);

  const auto md = slurp(dir / "report.md");
  for (auto section : {"## Clustering sweep", "## Per-label accuracy, majority assignment",
                       "## Per-label accuracy, share assignment", "## Token rankings",
                       "## Classification reports", "## Attribution by feature block"}) {
    CHECK_MESSAGE(md.find(section) != std::string::npos, section);
  }
  CHECK(md.find("stage missing") == std::string::npos);

  // Sweep grids: one row per k, one column per algorithm.
  for (auto f : {"sweep_silhouette.csv", "sweep_accuracy.csv", "sweep_accuracy_share.csv"}) {
    const auto rows = read_csv(dir / f);
    REQUIRE(rows.size() == 1 + 4);
    CHECK(rows[0].fields.size() == 1 + 5);
  }
  for (const auto* model : {"boost", "logreg", "boost_tuned"})
    for (const auto* subset : {"train", "valid", "test"})
      for (const auto* ext : {"txt", "csv", "json"})
        CHECK(fs::exists(dir / (std::string("report_") + model + "_" + subset + "." + ext)));

  // Share-accuracy cells re-parse to the values recomputed from the sweep assignments.
  const auto findings = corpus::load_findings(dir / "findings.jsonl", corpus::FileFormat::jsonl);
  std::vector<int> labels;
  for (const auto& f : findings) labels.push_back(static_cast<int>(*f.dimension));
  const auto assign = read_csv(dir / "sweep_assignments.csv");
  const auto share = read_csv(dir / "assign_share.csv");
  CHECK(std::vector<std::string>(share[0].fields.begin() + 1, share[0].fields.end() - 1) ==
        corpus::dimension_names());
  for (std::size_t r = 1; r < share.size(); ++r) {
    const auto k = static_cast<std::size_t>(parse_int(share[r].fields[0]));
    const auto col = std::find(assign[0].fields.begin(), assign[0].fields.end(), "birch_k" + std::to_string(k)) -
                     assign[0].fields.begin();
    REQUIRE(static_cast<std::size_t>(col) < assign[0].fields.size());
    std::vector<int> cluster_of;
    for (std::size_t i = 1; i < assign.size(); ++i)
      cluster_of.push_back(static_cast<int>(parse_int(assign[i].fields[static_cast<std::size_t>(col)])));
    const auto table = dimassign::share_accuracy(
        dimassign::ClusterLabelProfile::build(cluster_of, labels, k, corpus::dimension_names()));
    for (std::size_t l = 0; l < table.per_label.size(); ++l) {
      const auto& cell = share[r].fields[l + 1];
      if (!table.per_label[l]) CHECK(cell == "NA");
      else CHECK(parse_double(cell) == *table.per_label[l]);
    }
    CHECK(parse_double(share[r].fields.back()) == table.total);
  }

  // CSV and JSON renderings of one report agree to the last bit.
  const auto report_csv = read_csv(dir / "report_boost_test.csv");
  const auto report_json = nlohmann::json::parse(slurp(dir / "report_boost_test.json"));
  const auto& classes = report_json["classes"];
  for (std::size_t i = 0; i < classes.size(); ++i) {
    CHECK(report_csv[i + 1].fields[0] == classes[i]["label"].get<std::string>());
    CHECK(parse_double(report_csv[i + 1].fields[3]) == classes[i]["f1"].get<double>());
  }

  // Attribution records reconstruct their margins.
  std::istringstream attrib(slurp(dir / "attributions.jsonl"));
  std::string line;
  std::size_t count = 0;
  while (std::getline(attrib, line)) {
    const auto j = nlohmann::json::parse(line);
    double sum = j["baseline"].get<double>();
    for (const auto& c : j["contributions"]) sum += c[2].get<double>();
    CHECK(std::abs(sum - j["margin"].get<double>()) <= 1e-9);
    ++count;
  }
  std::size_t test_rows = 0;
  for (const auto& r : read_csv(dir / "split.csv")) test_rows += r.fields[1] == "test" ? 1 : 0;
  CHECK(count == test_rows);
  CHECK(count > 0);

  // A second run finds every stage up to date and leaves hashes unchanged.
  const auto before = pipeline::Manifest::load(dir / "manifest.json");
  const auto second = pipeline::run_all(cfg, log);
  for (const auto& r : second) CHECK(r.cached);
  const auto after = pipeline::Manifest::load(dir / "manifest.json");
  REQUIRE(before.stages.size() == after.stages.size());
  for (std::size_t i = 0; i < before.stages.size(); ++i) {
    CHECK(before.stages[i].input_hash == after.stages[i].input_hash);
    CHECK(before.stages[i].outputs == after.stages[i].outputs);
  }

  // Changing a boosting parameter reruns training but keeps the sweep cached.
  auto changed = cfg;
  changed.boost.eta = 0.2;
  const auto third = pipeline::run_all(changed, log);
  for (const auto& r : third) {
    if (r.name == "sweep" || r.name == "split") CHECK(r.cached);
    if (r.name == "train:boost") CHECK_FALSE(r.cached);
  }
  fs::remove_all(dir);
}

TEST_CASE("Manifest: save and load") {
  const auto dir = scratch("manifest");
  fs::create_directories(dir);
  pipeline::Manifest m;
  m.tool_version = std::string(pipeline::version());
  m.config = "[boost]\neta = 0.3\n";
  m.upsert({"split", "00ff", {{"split.csv", "abcd"}}, 1.5});
  m.upsert({"split", "0100", {{"split.csv", "abce"}}, 2.5});
  m.save(dir / "manifest.json");
  const auto back = pipeline::Manifest::load(dir / "manifest.json");
  REQUIRE(back.stages.size() == 1);
  CHECK(back.find("split")->input_hash == "0100");
  CHECK(back.config == m.config);
  CHECK(pipeline::Manifest::load(dir / "absent.json").stages.empty());
  std::ofstream(dir / "broken.json") << "{";
  CHECK_THROWS_AS(pipeline::Manifest::load(dir / "broken.json"), DataError);
  CHECK(pipeline::file_hash(dir / "manifest.json").size() == 16);
  fs::remove_all(dir);
}
