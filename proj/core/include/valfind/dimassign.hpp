#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace valfind::dimassign {

// Label counts per cluster. Labels are indices into label_names, so the
// same machinery serves dimensions and severities.
struct ClusterLabelProfile {
  std::vector<std::string> label_names;
  std::vector<std::vector<std::size_t>> counts;  // [cluster][label]

  std::size_t clusters() const { return counts.size(); }
  std::size_t labels() const { return label_names.size(); }
  std::size_t cluster_size(std::size_t c) const;
  std::size_t label_total(std::size_t l) const;
  std::size_t total() const;

  static ClusterLabelProfile build(std::span<const int> cluster_of, std::span<const int> label_of,
                                   std::size_t k, std::vector<std::string> label_names);
};

enum class Method { majority, share, sampled };
std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct AccuracyTable {
  std::vector<std::string> label_names;
  std::vector<std::optional<double>> per_label;  // nullopt when a label is absent
  double total = 0.0;
  Method method = Method::majority;
  std::size_t k = 0;
  std::string algorithm;
};

/// Modal label per cluster; ties go to the label with the larger corpus
/// count, then the lexicographically smaller name.
std::vector<int> majority_assign(const ClusterLabelProfile& profile);

AccuracyTable majority_accuracy(const ClusterLabelProfile& profile,
                                std::span<const int> assignment);

/// Expected accuracy of drawing each point's label from its cluster's
/// empirical label distribution.
AccuracyTable share_accuracy(const ClusterLabelProfile& profile);

/// One categorical draw per point from its cluster's label distribution.
std::vector<int> sampled_share_assign(const ClusterLabelProfile& profile,
                                      std::span<const int> cluster_of, std::uint64_t seed);

/// Per-label and total accuracy of explicit per-point predictions.
AccuracyTable accuracy_from_predictions(std::span<const int> truth, std::span<const int> predicted,
                                        std::vector<std::string> label_names, Method method);

}  // namespace valfind::dimassign
