#include <algorithm>
#include <cmath>

#include "valfind/boostlab.hpp"
#include "valfind/error.hpp"

namespace valfind::boostlab {

void LogRegParams::validate() const {
  if (!(l2 >= 0.0)) throw ConfigError("logreg l2 must be non-negative");
  if (epochs < 0) throw ConfigError("logreg epochs must be non-negative");
  if (!(step > 0.0)) throw ConfigError("logreg step must be positive");
}

namespace {

// Class probabilities for every row of a standardized design.
Matrix probabilities(const Matrix& z, const Matrix& w, std::span<const double> b) {
  const std::size_t classes = w.rows();
  Matrix p(z.rows(), classes);
  std::vector<double> s(classes);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const auto zi = z.row(i);
    for (std::size_t c = 0; c < classes; ++c) {
      const auto wc = w.row(c);
      double acc = b[c];
      for (std::size_t j = 0; j < zi.size(); ++j) acc += wc[j] * zi[j];
      s[c] = acc;
    }
    const auto pi = softmax(s);
    std::copy(pi.begin(), pi.end(), p.row(i).begin());
  }
  return p;
}

// Gradient of the mean cross-entropy alone.
std::pair<Matrix, std::vector<double>> ce_gradient(const Matrix& z, std::span<const int> labels,
                                                   const Matrix& p) {
  const std::size_t classes = p.cols();
  Matrix gw(classes, z.cols());
  std::vector<double> gb(classes, 0.0);
  const double inv_n = 1.0 / static_cast<double>(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    const auto zi = z.row(i);
    for (std::size_t c = 0; c < classes; ++c) {
      const double r = p(i, c) - (static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0);
      if (r == 0.0) continue;
      gb[c] += r;
      auto gc = gw.row(c);
      for (std::size_t j = 0; j < zi.size(); ++j) gc[j] += r * zi[j];
    }
  }
  for (double& v : gw.data()) v *= inv_n;
  for (double& v : gb) v *= inv_n;
  return {std::move(gw), std::move(gb)};
}

void check(const Matrix& z, std::span<const int> labels, const Matrix& w,
           std::span<const double> b) {
  if (labels.size() != z.rows()) throw DataError("label count differs from row count");
  if (w.cols() != z.cols() || b.size() != w.rows()) throw DataError("logreg shape mismatch");
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= w.rows()) throw DataError("label index out of range");
  }
}

}  // namespace

double logreg_objective(const Matrix& z, std::span<const int> labels, const Matrix& weights,
                        std::span<const double> intercept, double l2) {
  check(z, labels, weights, intercept);
  const auto p = probabilities(z, weights, intercept);
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    loss -= std::log(std::max(p(i, static_cast<std::size_t>(labels[i])), 1e-300));
  }
  double sq = 0.0;
  for (double v : weights.data()) sq += v * v;
  return loss / static_cast<double>(z.rows()) + 0.5 * l2 * sq;
}

std::pair<Matrix, std::vector<double>> logreg_gradient(const Matrix& z, std::span<const int> labels,
                                                       const Matrix& weights,
                                                       std::span<const double> intercept,
                                                       double l2) {
  check(z, labels, weights, intercept);
  auto g = ce_gradient(z, labels, probabilities(z, weights, intercept));
  auto gw = g.first.data();
  const auto w = weights.data();
  for (std::size_t j = 0; j < gw.size(); ++j) gw[j] += l2 * w[j];
  return g;
}

Matrix logreg_standardize(const LogRegModel& m, const Matrix& x) {
  if (x.cols() != m.feature_count) {
    throw DataError("feature matrix has " + std::to_string(x.cols()) + " columns, model expects " +
                    std::to_string(m.feature_count));
  }
  Matrix z(x.rows(), m.kept.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < m.kept.size(); ++j) {
      z(i, j) = (x(i, m.kept[j]) - m.mean[j]) / m.stdev[j];
    }
  }
  return z;
}

LogRegModel train_logreg(const Matrix& x, std::span<const int> labels,
                         std::vector<std::string> class_names, const LogRegParams& params) {
  params.validate();
  const std::size_t n = x.rows(), classes = class_names.size();
  if (classes < 2) throw DataError("logistic regression needs at least two classes");
  if (labels.size() != n) throw DataError("label count differs from row count");
  std::vector<std::size_t> counts(classes, 0);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) throw DataError("label index out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2) {
    throw DataError("degenerate training labels: fewer than two classes present");
  }

  LogRegModel m;
  m.classes = std::move(class_names);
  m.feature_count = x.cols();
  m.params = params;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, f);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x(i, f) - mean) * (x(i, f) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (!(sd > 0.0)) continue;
    m.kept.push_back(f);
    m.mean.push_back(mean);
    m.stdev.push_back(sd);
  }
  const Matrix z = logreg_standardize(m, x);
  m.weights = Matrix(classes, m.kept.size());
  m.intercept.assign(classes, 0.0);

  // Proximal step on the ridge term keeps large l2 values stable.
  const double shrink = 1.0 / (1.0 + params.step * params.l2);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    auto [gw, gb] = ce_gradient(z, labels, probabilities(z, m.weights, m.intercept));
    double norm = 0.0;
    const auto w = m.weights.data();
    const auto g = gw.data();
    for (std::size_t j = 0; j < g.size(); ++j) norm = std::max(norm, std::abs(g[j] + params.l2 * w[j]));
    for (double v : gb) norm = std::max(norm, std::abs(v));
    if (norm < 1e-6) break;
    for (std::size_t j = 0; j < g.size(); ++j) w[j] = (w[j] - params.step * g[j]) * shrink;
    for (std::size_t c = 0; c < classes; ++c) m.intercept[c] -= params.step * gb[c];
    m.epochs_run = epoch + 1;
  }
  for (double v : m.weights.data()) {
    if (!std::isfinite(v)) throw NumericError("logistic regression diverged; lower the step size");
  }
  return m;
}

std::vector<double> predict_logreg(const LogRegModel& m, std::span<const double> x) {
  if (x.size() != m.feature_count) throw DataError("feature vector length differs from the model's");
  std::vector<double> s = m.intercept;
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    const auto wc = m.weights.row(c);
    for (std::size_t j = 0; j < m.kept.size(); ++j) {
      s[c] += wc[j] * (x[m.kept[j]] - m.mean[j]) / m.stdev[j];
    }
  }
  return softmax(s);
}

std::vector<int> predict_logreg_classes(const LogRegModel& m, const Matrix& x) {
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto p = predict_logreg(m, x.row(i));
    out[i] = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  }
  return out;
}

}  // namespace valfind::boostlab
