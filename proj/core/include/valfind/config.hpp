#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "valfind/boostlab.hpp"
#include "valfind/corpus.hpp"

namespace valfind::config {

// A parsed TOML value: the subset used by experiment files (strings,
// integers, floats, booleans and flat arrays of those).
struct Value {
  enum class Kind { boolean, integer, real, string, array };
  Kind kind = Kind::string;
  bool b = false;
  long long i = 0;
  double d = 0.0;
  std::string s;
  std::vector<Value> items;

  double as_real(const std::string& key) const;
  long long as_int(const std::string& key) const;
  bool as_bool(const std::string& key) const;
  const std::string& as_string(const std::string& key) const;
  std::vector<double> as_real_list(const std::string& key) const;
  std::vector<long long> as_int_list(const std::string& key) const;
  std::vector<std::string> as_string_list(const std::string& key) const;
};

// Flat view of a TOML document; keys are "table.key".
class Document {
 public:
  static Document parse(std::istream& in, const std::string& source = "<config>");
  static Document parse(std::string_view text, const std::string& source = "<config>");
  static Document load(const std::filesystem::path& path);

  const Value* find(const std::string& key) const;
  const std::map<std::string, Value>& entries() const { return entries_; }

 private:
  std::map<std::string, Value> entries_;
};

enum class FeatureSelect { title, description, fused };
std::string_view to_string(FeatureSelect f);
FeatureSelect parse_feature_select(std::string_view s);

struct ExperimentConfig {
  // [paths]
  std::string findings;  // input for ingest
  std::string findings_format = "jsonl";
  std::string title_embeddings;  // EMB1 overrides; empty = use embed-hash output
  std::string description_embeddings;
  std::string output = "valfind-out";
  std::string run_id;
  std::string stopwords;
  std::string lemmas;
  // [corpus]
  std::size_t synth_n = 657;
  std::uint64_t synth_seed = 1;
  std::string synth_profile = "reference";  // reference | uniform | separable
  double synth_signal = 0.30;
  double synth_confusion = 0.25;
  std::vector<std::string> severity_levels{"low", "medium", "high"};
  // [split]
  corpus::SplitRatios split_ratios;
  std::uint64_t split_seed = 1;
  std::string stratify = "dimension";
  // [features]
  FeatureSelect features = FeatureSelect::fused;
  std::string target = "dimension";  // dimension | severity
  std::size_t min_df = 2;
  // [embed]
  std::size_t embed_dim = 256;
  std::uint64_t embed_seed = 1;
  // [cluster]
  std::string cluster_algorithm = "birch";
  std::size_t cluster_k = 9;
  std::string sweep_algorithms = "all";
  std::size_t k_min = 2;
  std::size_t k_max = 15;
  std::uint64_t cluster_seed = 1;
  std::size_t kmeans_n_init = 10;
  std::size_t minibatch_batch_size = 32;
  double birch_threshold = 0.5;
  std::size_t birch_branching = 50;
  std::size_t threads = 0;
  // [assign]
  std::string assign_methods = "majority,share";
  std::string assign_algorithm = "birch";
  std::uint64_t assign_seed = 1;
  // [boost], [logreg]
  std::string model = "boost";  // boost | logreg (what `train` fits)
  boostlab::BoostParams boost;
  boostlab::LogRegParams logreg;
  // [tune]
  boostlab::TuneGrid grid;
  std::string grid_file;
  // [attribute]
  std::size_t top_k = 10;

  /// Overlays every key of the document; unknown keys are a ConfigError.
  void apply(const Document& doc);
  /// Checks cross-field and per-module invariants.
  void validate() const;
  /// Canonical TOML rendering of every setting.
  std::string to_toml() const;

  std::filesystem::path output_dir() const;
};

/// Reads a tuning grid file: [tune] with eta, max_depth, rounds, lambda arrays.
boostlab::TuneGrid load_grid(const std::filesystem::path& path);

}  // namespace valfind::config
