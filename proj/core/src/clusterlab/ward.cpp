#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "valfind/clusterlab.hpp"
#include "valfind/error.hpp"

namespace valfind::clusterlab {

namespace {

double ward_delta(double na, std::span<const double> ma, double nb, std::span<const double> mb) {
  return na * nb / (na + nb) * squared_distance(ma, mb);
}

}  // namespace

std::vector<WardMerge> ward_merge_path(const Matrix& x) {
  const std::size_t n = x.rows();
  std::vector<WardMerge> path;
  if (n < 2) return path;
  path.reserve(n - 1);

  // Slot i holds the cluster whose smallest member is row i.
  Matrix centroid = x;
  std::vector<double> size(n, 1.0);
  std::vector<bool> active(n, true);
  Matrix delta(n, n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      delta(i, j) = ward_delta(1.0, x.row(i), 1.0, x.row(j));
    }
  }

  std::vector<std::size_t> alive(n);
  std::iota(alive.begin(), alive.end(), 0);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    // Lexicographic scan with strict '<' keeps the smallest (a, b) on ties.
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t ii = 0; ii < alive.size(); ++ii) {
      const std::size_t i = alive[ii];
      const auto row = delta.row(i);
      for (std::size_t jj = ii + 1; jj < alive.size(); ++jj) {
        const std::size_t j = alive[jj];
        if (row[j] < best) {
          best = row[j];
          ba = i;
          bb = j;
        }
      }
    }
    if (!std::isfinite(best)) throw NumericError("non-finite Ward increase");

    const double na = size[ba], nb = size[bb];
    auto ca = centroid.row(ba);
    auto cb = centroid.row(bb);
    for (std::size_t j = 0; j < ca.size(); ++j) ca[j] = (na * ca[j] + nb * cb[j]) / (na + nb);
    size[ba] = na + nb;
    active[bb] = false;
    alive.erase(std::find(alive.begin(), alive.end(), bb));
    path.push_back({ba, bb, best, static_cast<std::size_t>(size[ba])});

    for (std::size_t c : alive) {
      if (c == ba) continue;
      const double d = ward_delta(size[ba], centroid.row(ba), size[c], centroid.row(c));
      if (c < ba) delta(c, ba) = d;
      else delta(ba, c) = d;
    }
  }
  return path;
}

std::vector<int> cut_merge_path(std::size_t n, std::span<const WardMerge> path, std::size_t k) {
  if (k < 1 || k > n) throw ConfigError("k must lie in [1, n] for a merge-path cut");
  if (path.size() + 1 < n) throw DataError("merge path is incomplete");
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t m = 0; m < n - k; ++m) {
    const auto ra = find(path[m].a), rb = find(path[m].b);
    parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<int> root_label(n, -1);
  std::vector<int> labels(n);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    labels[i] = root_label[r];
  }
  return labels;
}

ClusterAssignment agglomerative_ward(const Matrix& x, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (k > x.rows()) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds the " + std::to_string(x.rows()) +
                      " rows to cluster");
  }
  const auto path = ward_merge_path(x);
  ClusterAssignment a;
  a.labels = cut_merge_path(x.rows(), path, k);
  a.k = k;
  a.algorithm = Algorithm::agglomerative_ward;
  a.inertia = within_cluster_sse(x, a.labels, k);
  return a;
}

}  // namespace valfind::clusterlab
