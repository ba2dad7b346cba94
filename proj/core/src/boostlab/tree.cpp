#include <algorithm>
#include <cmath>
#include <numeric>

#include "boostlab/presort.hpp"
#include "valfind/error.hpp"

namespace valfind::boostlab {

double leaf_weight(double sum_grad, double sum_hess, double lambda) {
  const double denom = sum_hess + lambda;
  if (!(denom > 0.0)) throw NumericError("leaf weight undefined: H + lambda must be positive");
  return -sum_grad / denom;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
  const double g = gl + gr, h = hl + hr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma;
}

std::size_t RegressionTree::leaf_index(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                                       : n.right);
  }
  return i;
}

std::size_t RegressionTree::leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

namespace detail {

Presorted::Presorted(const Matrix& x) : n(x.rows()), d(x.cols()), column(n * d), order(n * d) {
  if (n > UINT32_MAX) throw DataError("too many training rows");
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < d; ++f) column[f * n + r] = x(r, f);
  }
  for (std::size_t f = 0; f < d; ++f) {
    auto* o = order.data() + f * n;
    std::iota(o, o + n, std::uint32_t{0});
    const double* col = column.data() + f * n;
    std::stable_sort(o, o + n, [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
}

namespace {

// A node's rows, ascending, and per-feature sorted copies of them.
struct NodeRows {
  std::vector<std::uint32_t> rows;
  std::vector<std::uint32_t> sorted;  // sorted[f * m + i]
};

std::optional<SplitCandidate> scan(const Presorted& ps, const NodeRows& node,
                                   std::span<const GradientPair> grad, double g_total,
                                   double h_total, const TreeParams& p) {
  const std::size_t m = node.rows.size();
  std::optional<SplitCandidate> best;
  double best_gain = 0.0;
  for (std::size_t f = 0; f < ps.d; ++f) {
    const auto* list = node.sorted.data() + f * m;
    const double* col = ps.column.data() + f * ps.n;
    if (col[list[0]] == col[list[m - 1]]) continue;
    double gl = 0.0, hl = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const auto r = list[i];
      gl += grad[r].g;
      hl += grad[r].h;
      const double v = col[r], next = col[list[i + 1]];
      if (v == next) continue;
      const double gr = g_total - gl, hr = h_total - hl;
      if (hl < p.min_child_hessian || hr < p.min_child_hessian) continue;
      if (!(hl + p.lambda > 0.0) || !(hr + p.lambda > 0.0)) continue;
      const double gain = split_gain(gl, hl, gr, hr, p.lambda, p.gamma);
      if (gain > best_gain) {
        double thr = v + (next - v) / 2.0;
        if (!(thr > v)) thr = next;
        best_gain = gain;
        best = SplitCandidate{f, thr, gain};
      }
    }
  }
  return best;
}

struct Builder {
  const Presorted& ps;
  std::span<const GradientPair> grad;
  const TreeParams& p;
  RegressionTree tree;
  std::vector<char> goes_left;

  int grow(NodeRows node, int depth) {
    double g = 0.0, h = 0.0;
    for (auto r : node.rows) {
      g += grad[r].g;
      h += grad[r].h;
    }
    const int id = static_cast<int>(tree.nodes.size());
    TreeNode self;
    self.sum_grad = g;
    self.sum_hess = h;
    self.count = node.rows.size();
    self.weight = leaf_weight(g, h, p.lambda);
    if (!std::isfinite(self.weight)) throw NumericError("non-finite leaf weight");
    tree.nodes.push_back(self);
    if (depth >= p.max_depth || node.rows.size() < 2) return id;
    const auto split = scan(ps, node, grad, g, h, p);
    if (!split) return id;

    const std::size_t m = node.rows.size();
    std::size_t m_left = 0;
    for (auto r : node.rows) {
      goes_left[r] = ps.value(split->feature, r) < split->threshold;
      m_left += goes_left[r] ? 1 : 0;
    }
    const std::size_t m_right = m - m_left;
    NodeRows left, right;
    left.rows.reserve(m_left);
    right.rows.reserve(m_right);
    for (auto r : node.rows) (goes_left[r] ? left.rows : right.rows).push_back(r);
    left.sorted.resize(m_left * ps.d);
    right.sorted.resize(m_right * ps.d);
    for (std::size_t f = 0; f < ps.d; ++f) {
      auto* l = left.sorted.data() + f * m_left;
      auto* rr = right.sorted.data() + f * m_right;
      for (std::size_t i = 0; i < m; ++i) {
        const auto r = node.sorted[f * m + i];
        if (goes_left[r]) {
          *l++ = r;
        } else {
          *rr++ = r;
        }
      }
    }
    node = {};

    tree.nodes[static_cast<std::size_t>(id)].feature = static_cast<int>(split->feature);
    tree.nodes[static_cast<std::size_t>(id)].threshold = split->threshold;
    tree.nodes[static_cast<std::size_t>(id)].gain = split->gain;
    const int l = grow(std::move(left), depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    const int r = grow(std::move(right), depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

}  // namespace

RegressionTree build_tree(const Presorted& ps, std::span<const GradientPair> grad,
                          const TreeParams& p) {
  if (ps.n == 0) throw DataError("cannot grow a tree on zero rows");
  if (grad.size() != ps.n) throw DataError("gradient count differs from row count");
  NodeRows root;
  root.rows.resize(ps.n);
  std::iota(root.rows.begin(), root.rows.end(), std::uint32_t{0});
  root.sorted = ps.order;
  Builder b{ps, grad, p, {}, std::vector<char>(ps.n, 0)};
  b.grow(std::move(root), 0);
  return std::move(b.tree);
}

}  // namespace detail

RegressionTree build_tree(const Matrix& x, std::span<const GradientPair> grad,
                          const TreeParams& params) {
  return detail::build_tree(detail::Presorted(x), grad, params);
}

std::optional<SplitCandidate> best_split(const Matrix& x, std::span<const std::size_t> rows,
                                         std::span<const GradientPair> grad,
                                         const TreeParams& params) {
  if (rows.empty()) throw DataError("best_split needs a nonempty node");
  if (grad.size() != x.rows()) throw DataError("gradient count differs from row count");
  const detail::Presorted ps(x);
  std::vector<char> member(x.rows(), 0);
  for (auto r : rows) {
    if (r >= x.rows()) throw DataError("row index out of range");
    member[r] = 1;
  }
  detail::NodeRows node;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (member[r]) node.rows.push_back(static_cast<std::uint32_t>(r));
  }
  node.sorted.reserve(node.rows.size() * ps.d);
  for (std::size_t f = 0; f < ps.d; ++f) {
    for (std::size_t i = 0; i < ps.n; ++i) {
      const auto r = ps.order[f * ps.n + i];
      if (member[r]) node.sorted.push_back(r);
    }
  }
  double g = 0.0, h = 0.0;
  for (auto r : node.rows) {
    g += grad[r].g;
    h += grad[r].h;
  }
  return detail::scan(ps, node, grad, g, h, params);
}

}  // namespace valfind::boostlab
