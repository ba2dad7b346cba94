#include <algorithm>
#include <cmath>
#include <limits>

#include "boostlab/presort.hpp"
#include "valfind/error.hpp"

namespace valfind::boostlab {

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.size());
  if (scores.empty()) return p;
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    p[c] = std::exp(scores[c] - top);
    sum += p[c];
  }
  for (auto& v : p) v /= sum;
  return p;
}

namespace {

void check_labels(std::span<const int> labels, std::size_t n, std::size_t classes) {
  if (labels.size() != n) throw DataError("label count differs from row count");
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) throw DataError("label index out of range");
  }
}

double log_sum_exp(std::span<const double> s) {
  const double top = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (double v : s) sum += std::exp(v - top);
  return top + std::log(sum);
}

}  // namespace

std::vector<GradientPair> softmax_grad_hess(std::span<const int> labels, const Matrix& scores) {
  check_labels(labels, scores.rows(), scores.cols());
  const std::size_t c_count = scores.cols();
  std::vector<GradientPair> out(scores.rows() * c_count);
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    const auto p = softmax(scores.row(i));
    for (std::size_t c = 0; c < c_count; ++c) {
      const double y = static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0;
      out[i * c_count + c] = {p[c] - y, p[c] * (1.0 - p[c])};
    }
  }
  return out;
}

double softmax_loss(std::span<const int> labels, const Matrix& scores) {
  check_labels(labels, scores.rows(), scores.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    const auto row = scores.row(i);
    loss += log_sum_exp(row) - row[static_cast<std::size_t>(labels[i])];
  }
  return loss;
}

void BoostParams::validate() const {
  if (rounds < 0) throw ConfigError("rounds must be non-negative");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (!(min_child_hessian >= 0.0)) throw ConfigError("min_child_hessian must be non-negative");
}

namespace {

double tree_penalty(const RegressionTree& t, const BoostParams& p) {
  double sq = 0.0;
  std::size_t leaves = 0;
  for (const auto& n : t.nodes) {
    if (!n.is_leaf()) continue;
    ++leaves;
    const double w = p.eta * n.weight;
    sq += w * w;
  }
  return p.gamma * static_cast<double>(leaves) + 0.5 * p.lambda * sq;
}

Matrix base_margins(const BoostedModel& m, std::size_t n) {
  Matrix margins(n, m.num_classes());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < m.num_classes(); ++c) margins(i, c) = m.base_score[c];
  }
  return margins;
}

}  // namespace

BoostedModel train_boosted(const Matrix& x, std::span<const int> labels,
                           std::vector<std::string> class_names, const BoostParams& params) {
  params.validate();
  const std::size_t n = x.rows(), classes = class_names.size();
  if (classes < 2) throw DataError("boosting needs at least two classes");
  check_labels(labels, n, classes);
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw DataError("feature matrix contains non-finite values");
  }
  std::vector<std::size_t> counts(classes, 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2) {
    throw DataError("degenerate training labels: fewer than two classes present");
  }

  BoostedModel m;
  m.classes = std::move(class_names);
  m.feature_count = x.cols();
  m.params = params;
  m.trees.assign(classes, {});
  for (std::size_t c = 0; c < classes; ++c) {
    // Classes missing from the training rows get half a pseudo-count.
    const double prior = counts[c] > 0 ? static_cast<double>(counts[c]) / static_cast<double>(n)
                                       : 0.5 / static_cast<double>(n);
    m.base_score.push_back(std::log(prior));
  }

  Matrix margins = base_margins(m, n);
  double penalty = 0.0;
  m.objective_trace.push_back(softmax_loss(labels, margins));
  if (params.rounds == 0) return m;

  const detail::Presorted sorted(x);
  const auto tp = params.tree_params();
  std::vector<GradientPair> column(n);
  for (int round = 0; round < params.rounds; ++round) {
    const auto grad = softmax_grad_hess(labels, margins);
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t i = 0; i < n; ++i) column[i] = grad[i * classes + c];
      m.trees[c].push_back(detail::build_tree(sorted, column, tp));
      penalty += tree_penalty(m.trees[c].back(), params);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = x.row(i);
      for (std::size_t c = 0; c < classes; ++c) {
        margins(i, c) += params.eta * m.trees[c].back().predict(row);
      }
    }
    const double objective = softmax_loss(labels, margins) + penalty;
    if (!std::isfinite(objective)) throw NumericError("training objective became non-finite");
    const double prev = m.objective_trace.back();
    if (params.verify_objective && objective > prev + 1e-12 * std::max(1.0, std::abs(prev))) {
      throw NumericError("training objective increased at round " + std::to_string(round + 1));
    }
    m.objective_trace.push_back(objective);
  }
  return m;
}

std::vector<double> predict_margins(const BoostedModel& m, std::span<const double> x,
                                    std::optional<std::size_t> rounds) {
  if (x.size() != m.feature_count) {
    throw DataError("feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                    std::to_string(m.feature_count));
  }
  const std::size_t r_max = std::min(rounds.value_or(m.rounds()), m.rounds());
  std::vector<double> margins = m.base_score;
  for (std::size_t r = 0; r < r_max; ++r) {
    for (std::size_t c = 0; c < m.num_classes(); ++c) {
      margins[c] += m.params.eta * m.trees[c][r].predict(x);
    }
  }
  return margins;
}

std::vector<double> predict_boosted(const BoostedModel& m, std::span<const double> x) {
  return softmax(predict_margins(m, x));
}

namespace {

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

int predict_class(const BoostedModel& m, std::span<const double> x) {
  return argmax(predict_margins(m, x));
}

std::vector<int> predict_classes(const BoostedModel& m, const Matrix& x,
                                 std::optional<std::size_t> rounds) {
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = argmax(predict_margins(m, x.row(i), rounds));
  return out;
}

double boosted_objective(const BoostedModel& m, const Matrix& x, std::span<const int> labels) {
  Matrix margins(x.rows(), m.num_classes());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = predict_margins(m, x.row(i));
    std::copy(row.begin(), row.end(), margins.row(i).begin());
  }
  double penalty = 0.0;
  for (std::size_t r = 0; r < m.rounds(); ++r) {
    for (std::size_t c = 0; c < m.num_classes(); ++c) penalty += tree_penalty(m.trees[c][r], m.params);
  }
  return softmax_loss(labels, margins) + penalty;
}

TuneOutcome tune_boosted(const Matrix& train_x, std::span<const int> train_y,
                         const Matrix& valid_x, std::span<const int> valid_y,
                         const std::vector<std::string>& class_names, const BoostParams& base,
                         const TuneGrid& grid) {
  if (grid.eta.empty() || grid.max_depth.empty() || grid.rounds.empty() || grid.lambda.empty()) {
    throw ConfigError("every tuning grid axis needs at least one value");
  }
  if (valid_x.rows() == 0) throw DataError("tuning needs a nonempty validation split");
  check_labels(valid_y, valid_x.rows(), class_names.size());
  const int most_rounds = *std::max_element(grid.rounds.begin(), grid.rounds.end());
  TuneOutcome out;
  for (double eta : grid.eta) {
    for (int depth : grid.max_depth) {
      for (double lambda : grid.lambda) {
        BoostParams p = base;
        p.eta = eta;
        p.max_depth = depth;
        p.lambda = lambda;
        p.rounds = most_rounds;
        const auto model = train_boosted(train_x, train_y, class_names, p);
        for (int rounds : grid.rounds) {
          if (rounds < 0) throw ConfigError("tuning rounds must be non-negative");
          const auto pred = predict_classes(model, valid_x, static_cast<std::size_t>(rounds));
          std::size_t hit = 0;
          for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == valid_y[i] ? 1 : 0;
          TuneResult r;
          r.params = p;
          r.params.rounds = rounds;
          r.valid_accuracy = static_cast<double>(hit) / static_cast<double>(pred.size());
          if (out.results.empty() || r.valid_accuracy > out.results[out.best].valid_accuracy) {
            out.best = out.results.size();
          }
          out.results.push_back(r);
        }
      }
    }
  }
  return out;
}

}  // namespace valfind::boostlab
