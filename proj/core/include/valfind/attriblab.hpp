#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "valfind/boostlab.hpp"
#include "valfind/embedspace.hpp"

namespace valfind::attriblab {

struct RankedToken {
  std::string token;
  double score = 0.0;
};

struct TokenRanking {
  std::vector<std::string> classes;
  std::vector<std::vector<RankedToken>> per_class;  // scores non-increasing, ties by token
  std::size_t top_k = 0;
};

/// Total split gain per token in each class's trees. A token present in both
/// bag blocks is scored once, summing both features. Only tokens that were
/// split on appear.
TokenRanking rank_tokens_gain(const boostlab::BoostedModel& model,
                              const embedspace::FeatureLayout& layout, std::size_t top_k);

/// Absolute standardized coefficient per token and class (summed over bag
/// blocks); tokens with constant training columns score 0.
TokenRanking rank_tokens_logreg(const boostlab::LogRegModel& model,
                                const embedspace::FeatureLayout& layout, std::size_t top_k);

struct AttributionVector {
  int target_class = 0;
  double baseline = 0.0;
  std::vector<double> contributions;  // aligned with the feature layout

  double reconstructed() const;
};

/// Hessian-weighted expected value of every node's subtree.
std::vector<double> node_expectations(const boostlab::RegressionTree& tree);

/// Additive path attribution: along x's path, each split's feature receives
/// eta * (E[child] - E[node]); the baseline is base_score + eta * sum E[root].
AttributionVector path_attribution(const boostlab::BoostedModel& model, std::span<const double> x,
                                   int target_class);

struct BlockSummary {
  std::array<double, 4> mean_abs{};  // per block, mean over instances of sum |contribution|
  std::size_t instances = 0;
};

BlockSummary block_summary(std::span<const AttributionVector> attributions,
                           const embedspace::FeatureLayout& layout);

// Columns class,rank,token,score.
std::string rankings_csv(const TokenRanking& r);
/// One column per class, one row per rank.
std::string rankings_markdown(const TokenRanking& r);
std::string block_summary_csv(const BlockSummary& s);

}  // namespace valfind::attriblab
