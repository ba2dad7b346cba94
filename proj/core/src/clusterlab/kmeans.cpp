#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "valfind/clusterlab.hpp"
#include "valfind/error.hpp"

namespace valfind::clusterlab {

namespace {

void check_input(const Matrix& x, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (k > x.rows()) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds the " + std::to_string(x.rows()) +
                      " rows to cluster");
  }
}

// Nearest centroid (ties to the lowest index) and its squared distance.
std::pair<std::size_t, double> nearest(std::span<const double> p, const Matrix& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(p, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best, best_d};
}

// Moves the point farthest from its centroid (among clusters with more than
// one member) into each empty cluster. Returns the updated inertia.
double repair_empty(const Matrix& x, Matrix& centroids, std::vector<int>& labels,
                    std::vector<double>& dist, double inertia) {
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> count(k, 0);
  for (int l : labels) ++count[static_cast<std::size_t>(l)];
  for (std::size_t e = 0; e < k; ++e) {
    if (count[e] > 0) continue;
    std::size_t victim = x.rows();
    double far = -1.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (count[static_cast<std::size_t>(labels[i])] > 1 && dist[i] > far) {
        far = dist[i];
        victim = i;
      }
    }
    if (victim == x.rows()) throw NumericError("cannot repair empty cluster");
    --count[static_cast<std::size_t>(labels[victim])];
    labels[victim] = static_cast<int>(e);
    ++count[e];
    auto src = x.row(victim);
    std::copy(src.begin(), src.end(), centroids.row(e).begin());
    inertia -= dist[victim];
    dist[victim] = 0.0;
  }
  return std::max(inertia, 0.0);
}

Matrix cluster_means(const Matrix& x, std::span<const int> labels, std::size_t k,
                     const Matrix& fallback) {
  Matrix means(k, x.cols());
  std::vector<double> count(k, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    count[c] += 1.0;
    auto m = means.row(c);
    auto r = x.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) m[j] += r[j];
  }
  for (std::size_t c = 0; c < k; ++c) {
    auto m = means.row(c);
    if (count[c] == 0) {
      std::copy(fallback.row(c).begin(), fallback.row(c).end(), m.begin());
      continue;
    }
    for (double& v : m) v /= count[c];
  }
  return means;
}

struct Run {
  std::vector<int> labels;
  Matrix centroids;
  double inertia = 0.0;
  std::vector<double> trace;
};

Run lloyd(const Matrix& x, std::size_t k, Rng& rng, std::size_t max_iter, double tol) {
  const std::size_t n = x.rows();
  Run run;
  run.centroids = kmeanspp_init(x, k, rng);
  run.labels.assign(n, 0);
  std::vector<double> dist(n);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < std::max<std::size_t>(max_iter, 1); ++it) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto [c, d] = nearest(x.row(i), run.centroids);
      run.labels[i] = static_cast<int>(c);
      dist[i] = d;
      inertia += d;
    }
    inertia = repair_empty(x, run.centroids, run.labels, dist, inertia);
    run.trace.push_back(inertia);
    const bool converged = std::isfinite(prev) && (prev - inertia) <= tol * prev;
    run.centroids = cluster_means(x, run.labels, k, run.centroids);
    prev = inertia;
    if (converged) break;
  }
  run.inertia = within_cluster_sse(x, run.labels, k);
  run.trace.push_back(run.inertia);
  return run;
}

}  // namespace

Matrix kmeanspp_init(const Matrix& x, std::size_t k, Rng& rng) {
  check_input(x, k);
  const std::size_t n = x.rows();
  Matrix centroids(k, x.cols());
  auto place = [&](std::size_t c, std::size_t i) {
    std::copy(x.row(i).begin(), x.row(i).end(), centroids.row(c).begin());
  };
  place(0, static_cast<std::size_t>(rng.below(n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), centroids.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(rng.below(n));
    } else {
      const double u = rng.uniform() * total;
      double cum = 0.0;
      pick = n;
      std::size_t last_positive = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] > 0.0) last_positive = i;
        cum += d2[i];
        if (cum > u && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;
    }
    place(c, pick);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(x.row(i), centroids.row(c)));
    }
  }
  return centroids;
}

KMeansFit kmeans_fit(const Matrix& x, const KMeansParams& p) {
  check_input(x, p.k);
  if (p.n_init < 1) throw ConfigError("n_init must be >= 1");
  std::optional<Run> best;
  for (std::size_t r = 0; r < p.n_init; ++r) {
    Rng rng(hash_combine(p.seed, r));
    Run run = lloyd(x, p.k, rng, p.max_iter, p.tol);
    if (!best || run.inertia < best->inertia) best = std::move(run);
  }
  KMeansFit fit;
  fit.assignment.labels = std::move(best->labels);
  fit.assignment.k = p.k;
  fit.assignment.algorithm = Algorithm::kmeans;
  fit.assignment.seed = p.seed;
  fit.assignment.inertia = best->inertia;
  fit.assignment.params = {{"max_iter", static_cast<double>(p.max_iter)},
                           {"tol", p.tol},
                           {"n_init", static_cast<double>(p.n_init)}};
  fit.centroids = std::move(best->centroids);
  fit.inertia_trace = std::move(best->trace);
  return fit;
}

ClusterAssignment kmeans(const Matrix& x, const KMeansParams& params) {
  return kmeans_fit(x, params).assignment;
}

MiniBatchFit minibatch_kmeans_fit(const Matrix& x, const MiniBatchParams& p) {
  check_input(x, p.k);
  if (p.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  const std::size_t n = x.rows();
  const std::size_t batches = p.n_batches == 0 ? 100 * p.k : p.n_batches;

  // Same seeding stream as the first k-means restart.
  Rng rng(hash_combine(p.seed, std::uint64_t{0}));
  Matrix centroids = kmeanspp_init(x, p.k, rng);
  std::vector<double> seen(p.k, 0.0);
  std::vector<std::size_t> perm(n);
  std::vector<std::size_t> batch;
  std::vector<std::size_t> cached;
  for (std::size_t b = 0; b < batches; ++b) {
    batch.clear();
    if (p.batch_size >= n) {
      batch.resize(n);
      std::iota(batch.begin(), batch.end(), 0);
    } else {
      std::iota(perm.begin(), perm.end(), 0);
      for (std::size_t i = 0; i < p.batch_size; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(perm[i], perm[j]);
        batch.push_back(perm[i]);
      }
    }
    cached.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      cached[i] = nearest(x.row(batch[i]), centroids).first;
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const std::size_t c = cached[i];
      seen[c] += 1.0;
      const double eta = 1.0 / seen[c];
      auto cen = centroids.row(c);
      auto pt = x.row(batch[i]);
      for (std::size_t j = 0; j < cen.size(); ++j) cen[j] = (1.0 - eta) * cen[j] + eta * pt[j];
    }
  }

  MiniBatchFit fit;
  auto& a = fit.assignment;
  a.labels.assign(n, 0);
  std::vector<double> dist(n);
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto [c, d] = nearest(x.row(i), centroids);
    a.labels[i] = static_cast<int>(c);
    dist[i] = d;
    inertia += d;
  }
  inertia = repair_empty(x, centroids, a.labels, dist, inertia);
  a.k = p.k;
  a.algorithm = Algorithm::minibatch;
  a.seed = p.seed;
  a.inertia = inertia;
  a.params = {{"batch_size", static_cast<double>(p.batch_size)},
              {"n_batches", static_cast<double>(batches)}};
  fit.centroids = std::move(centroids);
  return fit;
}

ClusterAssignment minibatch_kmeans(const Matrix& x, const MiniBatchParams& params) {
  return minibatch_kmeans_fit(x, params).assignment;
}

}  // namespace valfind::clusterlab
