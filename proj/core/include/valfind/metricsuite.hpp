#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace valfind::metricsuite {

// Rows are true labels, columns predictions, both in label order.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::uint64_t>> counts;

  std::uint64_t total() const;
  std::uint64_t trace() const;
};

ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> predicted,
                          std::vector<std::string> label_order);
/// Index-based variant; indices refer to label_order.
ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          std::vector<std::string> label_order);

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  bool no_predictions = false;  // precision reported as 0
  bool no_instances = false;    // recall reported as 0
};

struct Averages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct ClassificationReport {
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  Averages macro;     // over classes with support > 0
  Averages weighted;  // support-weighted
  std::uint64_t total = 0;
};

ClassificationReport report(const ConfusionMatrix& cm);

// Aligned text mimicking the usual precision/recall/F1/support table;
// values rounded to two decimals here only.
std::string render_text(const ClassificationReport& r);
// Full precision; columns label,precision,recall,f1,support. Summary rows
// are "accuracy", "macro avg", "weighted avg".
std::string render_csv(const ClassificationReport& r);
std::string render_json(const ClassificationReport& r, const ConfusionMatrix& cm);

}  // namespace valfind::metricsuite
