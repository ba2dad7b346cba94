#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "valfind/matrix.hpp"

namespace valfind::boostlab {

struct GradientPair {
  double g = 0.0;
  double h = 0.0;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> scores);

/// Softmax cross-entropy gradients for every instance and class, stored
/// row-major (instance * classes + class). scores is n x classes.
std::vector<GradientPair> softmax_grad_hess(std::span<const int> labels, const Matrix& scores);

/// Summed softmax cross-entropy of the given margins.
double softmax_loss(std::span<const int> labels, const Matrix& scores);

/// Optimal leaf value -G / (H + lambda).
double leaf_weight(double sum_grad, double sum_hess, double lambda);

/// Structure score reduction of a split, net of the gamma penalty.
double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma);

struct TreeParams {
  double lambda = 1.0;
  double gamma = 0.0;
  int max_depth = 6;
  double min_child_hessian = 1e-3;
};

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Exact greedy search over the given rows. grad is indexed by row of x.
std::optional<SplitCandidate> best_split(const Matrix& x, std::span<const std::size_t> rows,
                                         std::span<const GradientPair> grad,
                                         const TreeParams& params);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaf value; on internal nodes the value it would have had as a leaf
  double gain = 0.0;
  double sum_grad = 0.0;
  double sum_hess = 0.0;
  std::size_t count = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Rows with x[feature] < threshold go left. Node 0 is the root.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  std::size_t leaf_index(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return nodes[leaf_index(x)].weight; }
  std::size_t leaves() const;
  std::size_t depth() const;
  bool operator==(const RegressionTree&) const = default;
};

/// Grows one tree depth-first on the given gradients.
RegressionTree build_tree(const Matrix& x, std::span<const GradientPair> grad,
                          const TreeParams& params);

struct BoostParams {
  int rounds = 100;  // trees per class
  double eta = 0.3;
  double lambda = 1.0;
  double gamma = 0.0;
  int max_depth = 6;
  double min_child_hessian = 1e-3;
  std::uint64_t seed = 1;
  bool verify_objective = true;  // NumericError if the objective rises between rounds

  void validate() const;
  TreeParams tree_params() const { return {lambda, gamma, max_depth, min_child_hessian}; }
  bool operator==(const BoostParams&) const = default;
};

struct BoostedModel {
  std::vector<std::string> classes;
  std::size_t feature_count = 0;
  BoostParams params;
  std::vector<double> base_score;                  // per class
  std::vector<std::vector<RegressionTree>> trees;  // [class][round]
  std::vector<double> objective_trace;             // objective after 0..rounds trees

  std::size_t num_classes() const { return classes.size(); }
  std::size_t rounds() const { return trees.empty() ? 0 : trees.front().size(); }
  bool operator==(const BoostedModel&) const = default;
};

/// Labels index into class_names; every class must be listed, at least two present.
BoostedModel train_boosted(const Matrix& x, std::span<const int> labels,
                           std::vector<std::string> class_names, const BoostParams& params);

/// Per-class margins using the first `rounds` trees (all when nullopt).
std::vector<double> predict_margins(const BoostedModel& m, std::span<const double> x,
                                    std::optional<std::size_t> rounds = std::nullopt);
std::vector<double> predict_boosted(const BoostedModel& m, std::span<const double> x);
/// Argmax of the margins; ties go to the lower class index.
int predict_class(const BoostedModel& m, std::span<const double> x);
std::vector<int> predict_classes(const BoostedModel& m, const Matrix& x,
                                 std::optional<std::size_t> rounds = std::nullopt);

/// Training objective: summed loss plus gamma*T + lambda/2*sum (eta*w)^2 over trees.
double boosted_objective(const BoostedModel& m, const Matrix& x, std::span<const int> labels);

struct TuneGrid {
  std::vector<double> eta{0.1, 0.3};
  std::vector<int> max_depth{3, 6};
  std::vector<int> rounds{50, 100};
  std::vector<double> lambda{1.0};
};

struct TuneResult {
  BoostParams params;
  double valid_accuracy = 0.0;
};

struct TuneOutcome {
  std::vector<TuneResult> results;  // grid order: eta, max_depth, lambda, rounds
  std::size_t best = 0;             // first maximum wins
};

/// Grid search; rounds are evaluated as prefixes of one ensemble per
/// (eta, max_depth, lambda), which is identical to retraining.
TuneOutcome tune_boosted(const Matrix& train_x, std::span<const int> train_y,
                         const Matrix& valid_x, std::span<const int> valid_y,
                         const std::vector<std::string>& class_names, const BoostParams& base,
                         const TuneGrid& grid);

struct LogRegParams {
  double l2 = 0.01;
  int epochs = 300;
  double step = 0.5;

  void validate() const;
  bool operator==(const LogRegParams&) const = default;
};

struct LogRegModel {
  std::vector<std::string> classes;
  std::size_t feature_count = 0;
  LogRegParams params;
  std::vector<std::size_t> kept;  // features with nonzero training stdev
  std::vector<double> mean;       // per kept feature
  std::vector<double> stdev;
  Matrix weights;                 // classes x kept
  std::vector<double> intercept;  // per class
  int epochs_run = 0;

  std::size_t num_classes() const { return classes.size(); }
  bool operator==(const LogRegModel&) const = default;
};

/// Standardized design matrix restricted to the model's kept features.
Matrix logreg_standardize(const LogRegModel& m, const Matrix& x);
/// Mean cross-entropy plus l2/2 * |W|^2 on a standardized design.
double logreg_objective(const Matrix& z, std::span<const int> labels, const Matrix& weights,
                        std::span<const double> intercept, double l2);
/// Gradient of logreg_objective: weights part (classes x features) and intercept part.
std::pair<Matrix, std::vector<double>> logreg_gradient(const Matrix& z, std::span<const int> labels,
                                                       const Matrix& weights,
                                                       std::span<const double> intercept,
                                                       double l2);

LogRegModel train_logreg(const Matrix& x, std::span<const int> labels,
                         std::vector<std::string> class_names, const LogRegParams& params);
std::vector<double> predict_logreg(const LogRegModel& m, std::span<const double> x);
std::vector<int> predict_logreg_classes(const LogRegModel& m, const Matrix& x);

// Self-describing JSON documents; parsing what was written gives back an
// equal model.
std::string to_json(const BoostedModel& m);
std::string to_json(const LogRegModel& m);
BoostedModel boosted_from_json(std::string_view text);
LogRegModel logreg_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const BoostedModel& m);
void save_model(const std::filesystem::path& path, const LogRegModel& m);
BoostedModel load_boosted(const std::filesystem::path& path);
LogRegModel load_logreg(const std::filesystem::path& path);

}  // namespace valfind::boostlab
