#include "valfind/attriblab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "valfind/csv.hpp"
#include "valfind/error.hpp"
#include "valfind/numfmt.hpp"

namespace valfind::attriblab {

using boostlab::BoostedModel;
using boostlab::LogRegModel;
using boostlab::RegressionTree;
using embedspace::Block;
using embedspace::FeatureLayout;

namespace {

void check_layout(std::size_t features, const FeatureLayout& layout) {
  if (features != layout.total()) {
    throw DataError("model has " + std::to_string(features) + " features but the layout describes " +
                    std::to_string(layout.total()));
  }
}

std::vector<RankedToken> top(const std::map<std::string, double>& scores, std::size_t k) {
  std::vector<RankedToken> out;
  for (const auto& [token, score] : scores) out.push_back({token, score});
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedToken& a, const RankedToken& b) { return a.score > b.score; });
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace

TokenRanking rank_tokens_gain(const BoostedModel& model, const FeatureLayout& layout,
                              std::size_t top_k) {
  if (top_k < 1) throw ConfigError("top_k must be at least 1");
  check_layout(model.feature_count, layout);
  TokenRanking r;
  r.classes = model.classes;
  r.top_k = top_k;
  for (const auto& trees : model.trees) {
    std::map<std::string, double> scores;
    for (const auto& t : trees) {
      for (const auto& n : t.nodes) {
        if (n.is_leaf()) continue;
        const auto f = static_cast<std::size_t>(n.feature);
        if (!layout.is_bag(f)) continue;
        scores[layout.describe(f).name] += n.gain;
      }
    }
    std::erase_if(scores, [](const auto& kv) { return !(kv.second > 0.0); });
    r.per_class.push_back(top(scores, top_k));
  }
  return r;
}

TokenRanking rank_tokens_logreg(const LogRegModel& model, const FeatureLayout& layout,
                                std::size_t top_k) {
  if (top_k < 1) throw ConfigError("top_k must be at least 1");
  check_layout(model.feature_count, layout);
  TokenRanking r;
  r.classes = model.classes;
  r.top_k = top_k;
  std::map<std::string, double> zero;
  for (std::size_t f = 0; f < layout.total(); ++f) {
    if (layout.is_bag(f)) zero.emplace(layout.describe(f).name, 0.0);
  }
  for (std::size_t c = 0; c < model.num_classes(); ++c) {
    auto scores = zero;
    const auto w = model.weights.row(c);
    for (std::size_t j = 0; j < model.kept.size(); ++j) {
      const auto f = model.kept[j];
      if (layout.is_bag(f)) scores[layout.describe(f).name] += std::abs(w[j]);
    }
    r.per_class.push_back(top(scores, top_k));
  }
  return r;
}

double AttributionVector::reconstructed() const {
  double s = baseline;
  for (double c : contributions) s += c;
  return s;
}

std::vector<double> node_expectations(const RegressionTree& tree) {
  std::vector<double> e(tree.nodes.size(), 0.0);
  // Children always follow their parent, so a reverse sweep sees them first.
  for (std::size_t i = tree.nodes.size(); i-- > 0;) {
    const auto& n = tree.nodes[i];
    if (n.is_leaf()) {
      e[i] = n.weight;
      continue;
    }
    const auto l = static_cast<std::size_t>(n.left), r = static_cast<std::size_t>(n.right);
    double wl = tree.nodes[l].sum_hess, wr = tree.nodes[r].sum_hess;
    if (!(wl + wr > 0.0)) {
      wl = static_cast<double>(tree.nodes[l].count);
      wr = static_cast<double>(tree.nodes[r].count);
    }
    if (!(wl + wr > 0.0)) wl = wr = 1.0;
    e[i] = (wl * e[l] + wr * e[r]) / (wl + wr);
  }
  return e;
}

AttributionVector path_attribution(const BoostedModel& model, std::span<const double> x,
                                   int target_class) {
  if (x.size() != model.feature_count) {
    throw DataError("feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                    std::to_string(model.feature_count));
  }
  if (target_class < 0 || static_cast<std::size_t>(target_class) >= model.num_classes()) {
    throw DataError("target class out of range");
  }
  const auto c = static_cast<std::size_t>(target_class);
  const double eta = model.params.eta;
  AttributionVector a;
  a.target_class = target_class;
  a.baseline = model.base_score[c];
  a.contributions.assign(model.feature_count, 0.0);
  for (const auto& tree : model.trees[c]) {
    const auto e = node_expectations(tree);
    a.baseline += eta * e[0];
    std::size_t i = 0;
    while (!tree.nodes[i].is_leaf()) {
      const auto& n = tree.nodes[i];
      const auto f = static_cast<std::size_t>(n.feature);
      const auto next = static_cast<std::size_t>(x[f] < n.threshold ? n.left : n.right);
      a.contributions[f] += eta * (e[next] - e[i]);
      i = next;
    }
  }
  return a;
}

BlockSummary block_summary(std::span<const AttributionVector> attributions,
                           const FeatureLayout& layout) {
  BlockSummary s;
  s.instances = attributions.size();
  for (const auto& a : attributions) {
    check_layout(a.contributions.size(), layout);
    for (std::size_t f = 0; f < a.contributions.size(); ++f) {
      s.mean_abs[static_cast<std::size_t>(layout.block_of(f))] += std::abs(a.contributions[f]);
    }
  }
  if (s.instances > 0) {
    for (auto& v : s.mean_abs) v /= static_cast<double>(s.instances);
  }
  return s;
}

std::string rankings_csv(const TokenRanking& r) {
  std::ostringstream out;
  csv::write_row(out, {"class", "rank", "token", "score"});
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    for (std::size_t i = 0; i < r.per_class[c].size(); ++i) {
      csv::write_row(out, {r.classes[c], std::to_string(i + 1), r.per_class[c][i].token,
                           format_double(r.per_class[c][i].score)});
    }
  }
  return out.str();
}

std::string rankings_markdown(const TokenRanking& r) {
  std::ostringstream out;
  out << "| rank |";
  for (const auto& c : r.classes) out << ' ' << c << " |";
  out << "\n|---|";
  for (std::size_t c = 0; c < r.classes.size(); ++c) out << "---|";
  out << '\n';
  std::size_t rows = 0;
  for (const auto& list : r.per_class) rows = std::max(rows, list.size());
  for (std::size_t i = 0; i < rows; ++i) {
    out << "| " << i + 1 << " |";
    for (const auto& list : r.per_class) out << ' ' << (i < list.size() ? list[i].token : "") << " |";
    out << '\n';
  }
  return out.str();
}

std::string block_summary_csv(const BlockSummary& s) {
  std::ostringstream out;
  csv::write_row(out, {"block", "mean_abs_contribution", "instances"});
  for (auto b : embedspace::kAllBlocks) {
    csv::write_row(out, {std::string(embedspace::to_string(b)),
                         format_double(s.mean_abs[static_cast<std::size_t>(b)]),
                         std::to_string(s.instances)});
  }
  return out.str();
}

}  // namespace valfind::attriblab
