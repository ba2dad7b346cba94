#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "valfind/config.hpp"
#include "valfind/corpus.hpp"
#include "valfind/embedspace.hpp"
#include "valfind/matrix.hpp"
#include "valfind/textprep.hpp"

namespace valfind::pipeline::detail {

namespace fs = std::filesystem;

// Artifact file names inside the output directory.
inline constexpr const char* kFindings = "findings.jsonl";
inline constexpr const char* kSplit = "split.csv";
inline constexpr const char* kTokens = "tokens.jsonl";
inline constexpr const char* kVocabTitle = "vocab_title.tsv";
inline constexpr const char* kVocabDescription = "vocab_description.tsv";
inline constexpr const char* kTitleEmb = "title.emb";
inline constexpr const char* kDescriptionEmb = "description.emb";
inline constexpr const char* kSweepSilhouette = "sweep_silhouette.csv";
inline constexpr const char* kSweepAccuracy = "sweep_accuracy.csv";
inline constexpr const char* kSweepAccuracyShare = "sweep_accuracy_share.csv";
inline constexpr const char* kSweepAssignments = "sweep_assignments.csv";
inline constexpr const char* kSweepErrors = "sweep_errors.csv";
inline constexpr const char* kTuneResults = "tune_results.csv";
inline constexpr const char* kRankingsBoost = "rankings_boost.csv";
inline constexpr const char* kRankingsLogreg = "rankings_logreg.csv";
inline constexpr const char* kRankingsMd = "rankings.md";
inline constexpr const char* kAttributions = "attributions.jsonl";
inline constexpr const char* kBlockSummary = "block_summary.csv";
inline constexpr const char* kReport = "report.md";
inline constexpr const char* kManifest = "manifest.json";

inline const std::vector<std::string> kModelNames = {"boost", "logreg", "boost_tuned"};
inline const std::vector<std::string> kSubsets = {"train", "valid", "test"};
inline std::string model_file(const std::string& name) { return "model_" + name + ".json"; }
inline std::string assign_file(const std::string& method) { return "assign_" + method + ".csv"; }
inline std::string report_file(const std::string& model, const std::string& subset,
                               const std::string& ext) {
  return "report_" + model + "_" + subset + "." + ext;
}

enum class Subset { train, valid, test };

void write_file(const fs::path& path, const std::string& text);
std::string read_file(const fs::path& path);

/// Throws DataError naming the stage that produces a missing artifact.
void require(const fs::path& dir, const std::string& file, const std::string& producer);

corpus::SeverityScale severity_scale(const config::ExperimentConfig& cfg);
std::vector<corpus::Finding> load_corpus(const fs::path& dir, const config::ExperimentConfig& cfg);

void save_split(const fs::path& path, const std::vector<corpus::Finding>& findings,
                const corpus::Split& split);
/// Subset of every finding, aligned with the corpus order.
std::vector<Subset> load_split(const fs::path& path, const std::vector<corpus::Finding>& findings);

struct TokenTable {
  std::vector<textprep::TokenSequence> title;
  std::vector<textprep::TokenSequence> description;
};
void save_tokens(const fs::path& path, const std::vector<corpus::Finding>& findings,
                 const TokenTable& tokens);
TokenTable load_tokens(const fs::path& path, const std::vector<corpus::Finding>& findings);

void save_vocab(const fs::path& path, const textprep::Vocabulary& vocab);
textprep::Vocabulary load_vocab(const fs::path& path);

struct Embeddings {
  Matrix title;  // rows aligned with the corpus
  Matrix description;
  std::string title_model;
  std::string description_model;
};
Embeddings load_aligned_embeddings(const fs::path& dir, const config::ExperimentConfig& cfg,
                                   const std::vector<corpus::Finding>& findings);
/// Embedding files the current config reads (hash output or user files).
std::vector<fs::path> embedding_paths(const fs::path& dir, const config::ExperimentConfig& cfg);

/// Clustering space: the selected embedding blocks, each row-normalized.
Matrix cluster_space(const Embeddings& emb, config::FeatureSelect select);

struct Design {
  std::shared_ptr<const embedspace::FeatureLayout> layout;
  Matrix x;
};
/// Bag-of-tokens plus embedding design for the selected fields.
Design build_design(const config::ExperimentConfig& cfg, const TokenTable& tokens,
                    const textprep::Vocabulary& title_vocab,
                    const textprep::Vocabulary& description_vocab, const Embeddings& emb);
/// Layout alone, as build_design would produce it.
std::shared_ptr<const embedspace::FeatureLayout> design_layout(
    const config::ExperimentConfig& cfg, const textprep::Vocabulary& title_vocab,
    const textprep::Vocabulary& description_vocab, const Embeddings& emb);

struct Targets {
  std::vector<std::string> classes;
  std::vector<int> labels;  // per finding
};
/// Labels for the configured target; every finding must carry one.
Targets targets(const config::ExperimentConfig& cfg, const std::vector<corpus::Finding>& findings);

std::vector<std::size_t> rows_of(const std::vector<Subset>& split, Subset s);

}  // namespace valfind::pipeline::detail
