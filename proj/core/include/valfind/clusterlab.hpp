#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "valfind/matrix.hpp"
#include "valfind/rng.hpp"

namespace valfind::clusterlab {

enum class Algorithm : std::uint8_t { kmeans, minibatch, agglomerative_ward, birch, spectral };
inline constexpr std::array<Algorithm, 5> kAllAlgorithms = {
    Algorithm::agglomerative_ward, Algorithm::birch, Algorithm::kmeans, Algorithm::minibatch,
    Algorithm::spectral};

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);
/// "all" or a comma-separated list of algorithm names.
std::vector<Algorithm> parse_algorithm_list(std::string_view s);

struct ClusterAssignment {
  std::vector<int> labels;  // one per row, in [0, k)
  std::size_t k = 0;
  Algorithm algorithm = Algorithm::kmeans;
  std::vector<std::pair<std::string, double>> params;
  std::uint64_t seed = 0;
  std::optional<double> inertia;

  /// Every label in [0, k) and every cluster nonempty.
  void validate(std::size_t rows) const;
  std::vector<std::size_t> sizes() const;
};

/// Sum of squared distances of rows to their cluster means.
double within_cluster_sse(const Matrix& x, std::span<const int> labels, std::size_t k);

// --- k-means -------------------------------------------------------------------

struct KMeansParams {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  double tol = 1e-6;  // relative inertia improvement
  std::size_t n_init = 10;
};

struct KMeansFit {
  ClusterAssignment assignment;
  Matrix centroids;
  std::vector<double> inertia_trace;  // of the retained restart
};

/// k-means++ seeding: first centre uniform, later ones D^2-weighted.
Matrix kmeanspp_init(const Matrix& x, std::size_t k, Rng& rng);

KMeansFit kmeans_fit(const Matrix& x, const KMeansParams& params);
ClusterAssignment kmeans(const Matrix& x, const KMeansParams& params);

struct MiniBatchParams {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t batch_size = 32;
  std::size_t n_batches = 0;  // 0 means 100 * k
};

struct MiniBatchFit {
  ClusterAssignment assignment;
  Matrix centroids;
};

MiniBatchFit minibatch_kmeans_fit(const Matrix& x, const MiniBatchParams& params);
ClusterAssignment minibatch_kmeans(const Matrix& x, const MiniBatchParams& params);

// --- Ward agglomeration --------------------------------------------------------

// Clusters are named by their smallest member row, so a merge of a and b
// (a < b) keeps the name a.
struct WardMerge {
  std::size_t a = 0;
  std::size_t b = 0;
  double delta = 0.0;  // |A||B|/(|A|+|B|) * ||mu_A - mu_B||^2
  std::size_t size = 0;
};

/// Full merge sequence from singletons down to one cluster (n - 1 merges).
std::vector<WardMerge> ward_merge_path(const Matrix& x);
/// Labels after the first n - k merges; clusters numbered by smallest member.
std::vector<int> cut_merge_path(std::size_t n, std::span<const WardMerge> path, std::size_t k);
ClusterAssignment agglomerative_ward(const Matrix& x, std::size_t k);

// --- BIRCH -------------------------------------------------------------------

struct ClusteringFeature {
  double n = 0.0;
  std::vector<double> linear_sum;
  double square_sum = 0.0;

  static ClusteringFeature of_point(std::span<const double> p);
  ClusteringFeature& operator+=(const ClusteringFeature& o);
  std::vector<double> centroid() const;
  /// Root-mean-square distance of members to the centroid.
  double radius() const;
};

struct BirchParams {
  std::size_t k = 2;
  double threshold = 0.5;
  std::size_t branching_factor = 50;
};

struct BirchFit {
  ClusterAssignment assignment;
  std::vector<ClusteringFeature> leaf_entries;  // in creation order
  std::vector<std::size_t> point_entry;         // leaf entry of each row
};

BirchFit birch_fit(const Matrix& x, const BirchParams& params);
ClusterAssignment birch(const Matrix& x, const BirchParams& params);

// --- Spectral -----------------------------------------------------------------

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column j pairs with values[j]
  std::size_t sweeps = 0;
};

/// Cyclic Jacobi for a symmetric matrix. Stops once the off-diagonal
/// Frobenius norm falls below tol times the matrix norm.
EigenDecomposition jacobi_eigen(const Matrix& symmetric, double tol = 1e-10,
                                std::size_t max_sweeps = 100);

// Eigendecomposition of the normalized Laplacian; independent of k, so it
// can be shared by every k of a sweep.
struct SpectralEmbedding {
  EigenDecomposition eigen;
  double sigma = 0.0;
};

SpectralEmbedding spectral_embedding(const Matrix& x);
SpectralEmbedding spectral_embedding_from_distances(const Matrix& distances);
ClusterAssignment spectral_from_embedding(const SpectralEmbedding& emb, std::size_t k,
                                          std::uint64_t seed);
ClusterAssignment spectral(const Matrix& x, std::size_t k, std::uint64_t seed);

// --- Silhouette ----------------------------------------------------------------

struct SilhouetteReport {
  std::vector<double> a;  // mean intra-cluster distance
  std::vector<double> b;  // smallest mean distance to another cluster
  std::vector<double> s;
  double mean_score = 0.0;
};

SilhouetteReport silhouette(const Matrix& x, std::span<const int> labels);
SilhouetteReport silhouette_from_distances(const Matrix& distances, std::span<const int> labels);

// --- Sweep -------------------------------------------------------------------

struct SweepOptions {
  std::vector<Algorithm> algorithms{kAllAlgorithms.begin(), kAllAlgorithms.end()};
  std::size_t k_min = 2;
  std::size_t k_max = 15;
  std::uint64_t seed = 0;
  std::size_t kmeans_n_init = 10;
  std::size_t kmeans_max_iter = 300;
  double kmeans_tol = 1e-6;
  std::size_t minibatch_batch_size = 32;
  double birch_threshold = 0.5;
  std::size_t birch_branching_factor = 50;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

struct SweepCell {
  Algorithm algorithm = Algorithm::kmeans;
  std::size_t k = 0;
  std::optional<ClusterAssignment> assignment;
  std::optional<double> silhouette;  // absent when k lies outside [2, n - 1]
  std::string error;  // empty when the cell succeeded
};

struct SweepResult {
  std::vector<Algorithm> algorithms;
  std::size_t k_min = 0;
  std::size_t k_max = 0;
  std::vector<SweepCell> cells;  // algorithm-major, then ascending k

  const SweepCell& cell(Algorithm a, std::size_t k) const;
};

/// Seed used for one (algorithm, k) cell.
std::uint64_t cell_seed(std::uint64_t seed, Algorithm a, std::size_t k);

/// Runs every (algorithm, k) cell. Cell failures are recorded, not thrown.
SweepResult sweep(const Matrix& x, const SweepOptions& options);

}  // namespace valfind::clusterlab
