#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "valfind/config.hpp"

namespace valfind::pipeline {

inline constexpr std::array<std::string_view, 13> kStages = {
    "ingest", "synth", "split", "preprocess", "embed-hash", "cluster", "sweep",
    "assign", "train", "tune", "eval", "attribute", "report"};

/// Library version baked in at build time.
std::string_view version();

struct StageRecord {
  std::string name;        // "train:boost" style for parameterized stages
  std::string input_hash;  // stage config fragment plus upstream artifact hashes
  std::map<std::string, std::string> outputs;  // file name -> content hash
  double wall_ms = 0.0;
};

struct Manifest {
  std::string tool_version;
  std::string config;  // TOML snapshot of the last run
  std::vector<StageRecord> stages;

  const StageRecord* find(std::string_view name) const;
  void upsert(StageRecord record);

  static Manifest load(const std::filesystem::path& path);  // empty when absent
  void save(const std::filesystem::path& path) const;
};

/// 16 hex digits of a 64-bit FNV-1a hash of the file's bytes.
std::string file_hash(const std::filesystem::path& path);

struct StageResult {
  std::string name;
  bool cached = false;
  std::vector<std::string> outputs;
};

/// Validates the config, checks upstream artifacts, runs one stage and
/// records it in manifest.json. A stage whose inputs and outputs match the
/// manifest is skipped.
StageResult run_stage(const config::ExperimentConfig& cfg, std::string_view stage, std::ostream& log);

/// Every stage in order: synth (or ingest when a findings path is set), split,
/// preprocess, embed-hash (unless both embedding files are given), sweep,
/// assign, train for both models, tune, eval, attribute, report.
std::vector<StageResult> run_all(const config::ExperimentConfig& cfg, std::ostream& log);

/// Markdown document assembled from whatever artifacts exist in dir;
/// absent stages become placeholders.
std::string render_report(const std::filesystem::path& dir);

}  // namespace valfind::pipeline
