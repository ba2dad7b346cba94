#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

#include "valfind/clusterlab.hpp"
#include "valfind/error.hpp"

namespace valfind::clusterlab {

SilhouetteReport silhouette_from_distances(const Matrix& dist, std::span<const int> labels) {
  const std::size_t n = dist.rows();
  if (labels.size() != n) throw DataError("silhouette: label count differs from row count");
  int max_label = -1;
  for (int l : labels) {
    if (l < 0) throw DataError("silhouette: negative cluster label");
    max_label = std::max(max_label, l);
  }
  const std::size_t k = static_cast<std::size_t>(max_label + 1);
  if (k < 2 || k + 1 > n) {
    throw ConfigError("silhouette needs 2 <= k <= n - 1 (k = " + std::to_string(k) +
                      ", n = " + std::to_string(n) + ")");
  }
  std::vector<double> size(k, 0.0);
  for (int l : labels) size[static_cast<std::size_t>(l)] += 1.0;
  for (double s : size) {
    if (s == 0.0) throw DataError("silhouette: empty cluster");
  }

  SilhouetteReport rep;
  rep.a.resize(n);
  rep.b.resize(n);
  rep.s.resize(n);
  std::vector<double> sums(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    const auto row = dist.row(i);
    for (std::size_t j = 0; j < n; ++j) sums[static_cast<std::size_t>(labels[j])] += row[j];
    const auto own = static_cast<std::size_t>(labels[i]);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sums[c] / size[c]);
    }
    const double a = size[own] > 1 ? sums[own] / (size[own] - 1.0) : 0.0;
    double s = 0.0;
    if (size[own] > 1) {
      const double m = std::max(a, b);
      s = m > 0.0 ? (b - a) / m : 0.0;
    }
    rep.a[i] = a;
    rep.b[i] = b;
    rep.s[i] = s;
    total += s;
  }
  rep.mean_score = total / static_cast<double>(n);
  return rep;
}

SilhouetteReport silhouette(const Matrix& x, std::span<const int> labels) {
  return silhouette_from_distances(pairwise_distances(x), labels);
}

const SweepCell& SweepResult::cell(Algorithm a, std::size_t k) const {
  for (const auto& c : cells) {
    if (c.algorithm == a && c.k == k) return c;
  }
  throw DataError("sweep has no cell for " + std::string(to_string(a)) + " k=" + std::to_string(k));
}

std::uint64_t cell_seed(std::uint64_t seed, Algorithm a, std::size_t k) {
  return hash_combine(hash_combine(seed, to_string(a)), static_cast<std::uint64_t>(k));
}

SweepResult sweep(const Matrix& x, const SweepOptions& opt) {
  if (opt.algorithms.empty()) throw ConfigError("sweep needs at least one algorithm");
  if (opt.k_min < 1 || opt.k_min > opt.k_max) throw ConfigError("sweep k range is empty");
  if (opt.k_max > x.rows()) {
    throw ConfigError("sweep k_max = " + std::to_string(opt.k_max) + " exceeds the " +
                      std::to_string(x.rows()) + " rows");
  }

  SweepResult res;
  res.algorithms = opt.algorithms;
  res.k_min = opt.k_min;
  res.k_max = opt.k_max;
  for (auto a : opt.algorithms) {
    for (std::size_t k = opt.k_min; k <= opt.k_max; ++k) res.cells.push_back({a, k, {}, {}, {}});
  }

  // Shared, k-independent precomputation.
  const Matrix dist = pairwise_distances(x);
  const bool want_ward = std::count(opt.algorithms.begin(), opt.algorithms.end(),
                                    Algorithm::agglomerative_ward) > 0;
  const bool want_spectral =
      std::count(opt.algorithms.begin(), opt.algorithms.end(), Algorithm::spectral) > 0;
  std::vector<WardMerge> ward_path;
  if (want_ward) ward_path = ward_merge_path(x);
  std::optional<SpectralEmbedding> spectral_emb;
  std::string spectral_error;
  if (want_spectral) {
    try {
      spectral_emb = spectral_embedding_from_distances(dist);
    } catch (const Error& e) {
      spectral_error = e.what();
    }
  }

  auto run_cell = [&](SweepCell& cell) {
    const std::uint64_t seed = cell_seed(opt.seed, cell.algorithm, cell.k);
    try {
      ClusterAssignment a;
      switch (cell.algorithm) {
        case Algorithm::kmeans:
          a = kmeans(x, {cell.k, seed, opt.kmeans_max_iter, opt.kmeans_tol, opt.kmeans_n_init});
          break;
        case Algorithm::minibatch:
          a = minibatch_kmeans(x, {cell.k, seed, opt.minibatch_batch_size, 0});
          break;
        case Algorithm::agglomerative_ward:
          a.labels = cut_merge_path(x.rows(), ward_path, cell.k);
          a.k = cell.k;
          a.algorithm = Algorithm::agglomerative_ward;
          a.inertia = within_cluster_sse(x, a.labels, cell.k);
          break;
        case Algorithm::birch:
          a = birch(x, {cell.k, opt.birch_threshold, opt.birch_branching_factor});
          break;
        case Algorithm::spectral:
          if (!spectral_emb) throw NumericError(spectral_error);
          a = spectral_from_embedding(*spectral_emb, cell.k, seed);
          break;
      }
      a.seed = seed;
      if (cell.k >= 2 && cell.k < x.rows()) {
        cell.silhouette = silhouette_from_distances(dist, a.labels).mean_score;
      }
      cell.assignment = std::move(a);
    } catch (const Error& e) {
      cell.error = e.what();
    }
  };

  std::size_t threads = opt.threads ? opt.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, res.cells.size());
  if (threads == 1) {
    for (auto& c : res.cells) run_cell(c);
    return res;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < res.cells.size(); i = next++) run_cell(res.cells[i]);
      });
    }
  }
  return res;
}

}  // namespace valfind::clusterlab
