#include <algorithm>
#include <cmath>
#include <numeric>

#include "valfind/clusterlab.hpp"
#include "valfind/error.hpp"

namespace valfind::clusterlab {

EigenDecomposition jacobi_eigen(const Matrix& sym, double tol, std::size_t max_sweeps) {
  const std::size_t n = sym.rows();
  if (sym.cols() != n) throw DataError("Jacobi eigensolver needs a square matrix");
  double norm2 = 0.0;
  for (double v : sym.data()) {
    if (!std::isfinite(v)) throw NumericError("Jacobi eigensolver: non-finite entry");
    norm2 += v * v;
  }
  const double norm = std::sqrt(norm2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(sym(i, j) - sym(j, i)) > 1e-12 * std::max(1.0, norm)) {
        throw DataError("Jacobi eigensolver needs a symmetric matrix");
      }
    }
  }

  Matrix a = sym;
  Matrix vt(n, n);  // row i accumulates eigenvector i
  for (std::size_t i = 0; i < n; ++i) vt(i, i) = 1.0;

  EigenDecomposition out;
  bool converged = false;
  for (std::size_t sweep = 0; sweep <= max_sweeps; ++sweep) {
    double off2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) off2 += 2.0 * a(i, j) * a(i, j);
    }
    if (std::sqrt(off2) <= tol * norm) {
      converged = true;
      break;
    }
    if (sweep == max_sweeps) break;
    ++out.sweeps;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p), aqq = a(q, q);
        const double g = 100.0 * std::abs(apq);
        // Late sweeps: drop elements too small to move either diagonal entry.
        if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        auto rp = a.row(p);
        auto rq = a.row(q);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = rp[r], arq = rq[r];
          const double np = arp - s * (arq + tau * arp);
          const double nq = arq + s * (arp - tau * arq);
          rp[r] = np;
          rq[r] = nq;
          a(r, p) = np;
          a(r, q) = nq;
        }
        auto vp = vt.row(p);
        auto vq = vt.row(q);
        for (std::size_t r = 0; r < n; ++r) {
          const double xp = vp[r], xq = vq[r];
          vp[r] = xp - s * (xq + tau * xp);
          vq[r] = xq + s * (xp - tau * xq);
        }
      }
    }
  }
  if (!converged) throw NumericError("Jacobi eigensolver did not converge");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto src = vt.row(order[j]);
    out.values[j] = a(order[j], order[j]);
    // Sign convention: the largest-magnitude component is positive.
    std::size_t arg = 0;
    for (std::size_t r = 1; r < n; ++r) {
      if (std::abs(src[r]) > std::abs(src[arg])) arg = r;
    }
    const double sign = src[arg] < 0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = sign * src[r];
  }
  return out;
}

SpectralEmbedding spectral_embedding_from_distances(const Matrix& dist) {
  const std::size_t n = dist.rows();
  if (n < 2) throw ConfigError("spectral clustering needs at least two points");
  std::vector<double> upper;
  upper.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(dist(i, j));
  }
  std::sort(upper.begin(), upper.end());
  const std::size_t m = upper.size();
  const double sigma = m % 2 ? upper[m / 2] : 0.5 * (upper[m / 2 - 1] + upper[m / 2]);
  if (!(sigma > 0.0)) throw NumericError("median pairwise distance is zero; affinity undefined");

  Matrix w(n, n);
  std::vector<double> degree(n, 0.0);
  const double denom = 2.0 * sigma * sigma;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::exp(-dist(i, j) * dist(i, j) / denom);
      w(i, j) = w(j, i) = v;
      degree[i] += v;
      degree[j] += v;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (degree[i] == 0.0) {
      throw NumericError("point " + std::to_string(i) + " has zero degree in the affinity graph");
    }
  }
  Matrix lap(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double norm_w = w(i, j) / std::sqrt(degree[i] * degree[j]);
      lap(i, j) = (i == j ? 1.0 : 0.0) - norm_w;
    }
  }
  SpectralEmbedding emb;
  emb.eigen = jacobi_eigen(lap, 1e-10);
  emb.sigma = sigma;
  return emb;
}

SpectralEmbedding spectral_embedding(const Matrix& x) {
  return spectral_embedding_from_distances(pairwise_distances(x));
}

ClusterAssignment spectral_from_embedding(const SpectralEmbedding& emb, std::size_t k,
                                          std::uint64_t seed) {
  const std::size_t n = emb.eigen.vectors.rows();
  if (k < 2 || k > n) {
    throw ConfigError("spectral clustering needs 2 <= k <= n (k = " + std::to_string(k) + ")");
  }
  Matrix u = emb.eigen.vectors.column_block(0, k);
  normalize_rows(u);
  KMeansParams kp;
  kp.k = k;
  kp.seed = seed;
  auto a = kmeans(u, kp);
  a.algorithm = Algorithm::spectral;
  a.inertia.reset();
  a.params = {{"sigma", emb.sigma}, {"n_init", static_cast<double>(kp.n_init)}};
  return a;
}

ClusterAssignment spectral(const Matrix& x, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > x.rows()) {
    throw ConfigError("spectral clustering needs 2 <= k <= n (k = " + std::to_string(k) + ")");
  }
  return spectral_from_embedding(spectral_embedding(x), k, seed);
}

}  // namespace valfind::clusterlab
