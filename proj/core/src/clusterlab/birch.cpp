#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

#include "valfind/clusterlab.hpp"
#include "valfind/error.hpp"

namespace valfind::clusterlab {

ClusteringFeature ClusteringFeature::of_point(std::span<const double> p) {
  ClusteringFeature cf;
  cf.n = 1.0;
  cf.linear_sum.assign(p.begin(), p.end());
  for (double v : p) cf.square_sum += v * v;
  return cf;
}

ClusteringFeature& ClusteringFeature::operator+=(const ClusteringFeature& o) {
  if (linear_sum.empty()) linear_sum.assign(o.linear_sum.size(), 0.0);
  n += o.n;
  for (std::size_t j = 0; j < linear_sum.size(); ++j) linear_sum[j] += o.linear_sum[j];
  square_sum += o.square_sum;
  return *this;
}

std::vector<double> ClusteringFeature::centroid() const {
  std::vector<double> c(linear_sum);
  if (n > 0) {
    for (double& v : c) v /= n;
  }
  return c;
}

double ClusteringFeature::radius() const {
  if (n <= 0) return 0.0;
  double c2 = 0.0;
  for (double v : linear_sum) c2 += (v / n) * (v / n);
  return std::sqrt(std::max(0.0, square_sum / n - c2));
}

namespace {

struct Node;

struct Entry {
  ClusteringFeature cf;
  std::vector<double> centroid;  // cached cf.centroid()
  std::unique_ptr<Node> child;   // null for leaf entries
  std::size_t leaf_id = 0;       // leaf entries only

  void refresh() { centroid = cf.centroid(); }
};

struct Node {
  bool leaf = true;
  std::vector<Entry> entries;
};

std::size_t closest_entry(const Node& node, std::span<const double> p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < node.entries.size(); ++i) {
    const double d = squared_distance(p, node.entries[i].centroid);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

class CfTree {
 public:
  CfTree(double threshold, std::size_t branching)
      : threshold_(threshold), branching_(branching), root_(std::make_unique<Node>()) {}

  std::size_t insert(std::span<const double> p) {
    const auto point = ClusteringFeature::of_point(p);
    std::size_t leaf_id = 0;
    if (auto split = insert_into(*root_, p, point, leaf_id)) {
      auto root = std::make_unique<Node>();
      root->leaf = false;
      root->entries.push_back(std::move(split->first));
      root->entries.push_back(std::move(split->second));
      root_ = std::move(root);
    }
    return leaf_id;
  }

  std::vector<ClusteringFeature> leaf_entries() const {
    std::vector<ClusteringFeature> out(next_leaf_id_);
    collect(*root_, out);
    return out;
  }

 private:
  using SplitPair = std::pair<Entry, Entry>;

  std::optional<SplitPair> insert_into(Node& node, std::span<const double> p,
                                       const ClusteringFeature& point, std::size_t& leaf_id) {
    if (node.leaf) {
      if (!node.entries.empty()) {
        auto& e = node.entries[closest_entry(node, p)];
        ClusteringFeature merged = e.cf;
        merged += point;
        if (merged.radius() <= threshold_) {
          e.cf = std::move(merged);
          e.refresh();
          leaf_id = e.leaf_id;
          return std::nullopt;
        }
      }
      Entry fresh;
      fresh.cf = point;
      fresh.refresh();
      fresh.leaf_id = next_leaf_id_++;
      leaf_id = fresh.leaf_id;
      node.entries.push_back(std::move(fresh));
    } else {
      const std::size_t i = closest_entry(node, p);
      auto split = insert_into(*node.entries[i].child, p, point, leaf_id);
      if (!split) {
        node.entries[i].cf += point;
        node.entries[i].refresh();
        return std::nullopt;
      }
      node.entries[i] = std::move(split->first);
      node.entries.insert(node.entries.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                          std::move(split->second));
    }
    if (node.entries.size() <= branching_) return std::nullopt;
    return split_node(node);
  }

  // Farthest pair of entries seeds two new nodes; the rest go to the nearer
  // seed (ties to the first).
  SplitPair split_node(Node& node) {
    auto& es = node.entries;
    std::size_t sa = 0, sb = 1;
    double far = -1.0;
    for (std::size_t i = 0; i < es.size(); ++i) {
      for (std::size_t j = i + 1; j < es.size(); ++j) {
        const double d = squared_distance(es[i].centroid, es[j].centroid);
        if (d > far) {
          far = d;
          sa = i;
          sb = j;
        }
      }
    }
    auto left = std::make_unique<Node>();
    auto right = std::make_unique<Node>();
    left->leaf = right->leaf = node.leaf;
    const std::vector<double> seed_a = es[sa].centroid;
    const std::vector<double> seed_b = es[sb].centroid;
    for (std::size_t i = 0; i < es.size(); ++i) {
      bool to_left = i == sa;
      if (i != sa && i != sb) {
        to_left = squared_distance(es[i].centroid, seed_a) <=
                  squared_distance(es[i].centroid, seed_b);
      }
      (to_left ? left : right)->entries.push_back(std::move(es[i]));
    }
    return {wrap(std::move(left)), wrap(std::move(right))};
  }

  static Entry wrap(std::unique_ptr<Node> node) {
    Entry e;
    for (const auto& c : node->entries) e.cf += c.cf;
    e.refresh();
    e.child = std::move(node);
    return e;
  }

  static void collect(const Node& node, std::vector<ClusteringFeature>& out) {
    for (const auto& e : node.entries) {
      if (node.leaf) out[e.leaf_id] = e.cf;
      else collect(*e.child, out);
    }
  }

  double threshold_;
  std::size_t branching_;
  std::unique_ptr<Node> root_;
  std::size_t next_leaf_id_ = 0;
};

}  // namespace

BirchFit birch_fit(const Matrix& x, const BirchParams& p) {
  if (!(p.threshold > 0.0)) throw ConfigError("BIRCH threshold must be > 0");
  if (p.branching_factor < 2) throw ConfigError("BIRCH branching factor must be >= 2");
  if (p.k < 1) throw ConfigError("k must be >= 1");

  CfTree tree(p.threshold, p.branching_factor);
  BirchFit fit;
  fit.point_entry.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) fit.point_entry.push_back(tree.insert(x.row(i)));
  fit.leaf_entries = tree.leaf_entries();
  if (p.k > fit.leaf_entries.size()) {
    throw ConfigError("k = " + std::to_string(p.k) + " exceeds the " +
                      std::to_string(fit.leaf_entries.size()) +
                      " BIRCH leaf entries; use a smaller threshold");
  }

  Matrix centroids(fit.leaf_entries.size(), x.cols());
  for (std::size_t e = 0; e < fit.leaf_entries.size(); ++e) {
    const auto c = fit.leaf_entries[e].centroid();
    std::copy(c.begin(), c.end(), centroids.row(e).begin());
  }
  const auto global = agglomerative_ward(centroids, p.k);

  auto& a = fit.assignment;
  a.labels.resize(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) a.labels[i] = global.labels[fit.point_entry[i]];
  a.k = p.k;
  a.algorithm = Algorithm::birch;
  a.inertia = within_cluster_sse(x, a.labels, p.k);
  a.params = {{"threshold", p.threshold},
              {"branching_factor", static_cast<double>(p.branching_factor)},
              {"leaf_entries", static_cast<double>(fit.leaf_entries.size())}};
  return fit;
}

ClusterAssignment birch(const Matrix& x, const BirchParams& params) {
  return birch_fit(x, params).assignment;
}

}  // namespace valfind::clusterlab
