#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "../support/oracles.hpp"
#include "valfind/clusterlab.hpp"
#include "valfind/error.hpp"

using namespace valfind;
using namespace valfind::clusterlab;

namespace {

Matrix line(std::initializer_list<double> xs) {
  std::vector<std::vector<double>> rows;
  for (double x : xs) rows.push_back({x});
  return Matrix::from_rows(rows);
}

Matrix blobs(std::uint64_t seed, std::size_t per, double gap) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix x(2 * per, 2);
  for (std::size_t i = 0; i < 2 * per; ++i) {
    const double cx = i < per ? 0.0 : gap;
    x(i, 0) = cx + noise(gen);
    x(i, 1) = noise(gen);
  }
  return x;
}

// Fraction of rows on which two 2-cluster labellings agree, best over the
// two label permutations.
double agreement2(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  const double n = static_cast<double>(a.size());
  return std::max(same / n, 1.0 - same / n);
}

// Same partition up to renaming of the clusters.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

double max_residual(const Matrix& a, const EigenDecomposition& e) {
  double worst = 0.0;
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double av = 0.0;
      for (std::size_t t = 0; t < n; ++t) av += a(i, t) * e.vectors(t, j);
      worst = std::max(worst, std::abs(av - e.values[j] * e.vectors(i, j)));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("kmeans: trivial cases") {
  const auto two = kmeans_fit(line({0.0, 3.0}), {.k = 2, .seed = 1});
  CHECK(two.assignment.labels[0] != two.assignment.labels[1]);
  CHECK(*two.assignment.inertia == 0.0);

  std::mt19937_64 gen(2);
  const auto x = oracle::random_matrix(gen, 17, 3);
  const auto one = kmeans(x, {.k = 1, .seed = 5});
  CHECK(std::all_of(one.labels.begin(), one.labels.end(), [](int l) { return l == 0; }));
  CHECK(*one.inertia == doctest::Approx(oracle::sse_of(x, one.labels, 1)).epsilon(1e-12));
  CHECK_THROWS_AS(kmeans(x, {.k = 18}), ConfigError);
}

TEST_CASE("kmeans: six points on a line match exhaustive search") {
  const auto x = line({0, 1, 2, 10, 11, 12});
  const auto a = kmeans(x, {.k = 2, .seed = 3});
  const auto [best, labels] = oracle::optimal_partition(x, 2);
  CHECK(same_partition(a.labels, labels));
  CHECK(same_partition(a.labels, {0, 0, 0, 1, 1, 1}));
  CHECK(*a.inertia == doctest::Approx(best));
}

TEST_CASE("kmeans: inertia never rises across Lloyd iterations") {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 30; ++t) {
    const auto x = oracle::random_matrix(gen, 40, 4);
    const auto fit = kmeans_fit(x, {.k = 2 + gen() % 5, .seed = gen(), .n_init = 3});
    for (std::size_t i = 1; i < fit.inertia_trace.size(); ++i)
      CHECK(fit.inertia_trace[i] <= fit.inertia_trace[i - 1] * (1 + 1e-12));
    CHECK_NOTHROW(fit.assignment.validate(x.rows()));
  }
}

TEST_CASE("kmeans: deterministic per seed") {
  std::mt19937_64 gen(1);
  const auto x = oracle::random_matrix(gen, 60, 5);
  CHECK(kmeans(x, {.k = 4, .seed = 9}).labels == kmeans(x, {.k = 4, .seed = 9}).labels);
}

TEST_CASE("minibatch: one full batch equals one Lloyd step") {
  std::mt19937_64 gen(13);
  for (int t = 0; t < 10; ++t) {
    const auto x = oracle::random_matrix(gen, 30, 3);
    const std::size_t k = 2 + gen() % 4;
    const auto seed = gen();
    const auto mb = minibatch_kmeans_fit(x, {.k = k, .seed = seed, .batch_size = 30, .n_batches = 1});
    const auto km = kmeans_fit(x, {.k = k, .seed = seed, .max_iter = 1, .n_init = 1});
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(mb.centroids(i, j) - km.centroids(i, j)) <= 1e-9);
  }
}

TEST_CASE("minibatch: k=1 and agreement with kmeans on far blobs") {
  std::mt19937_64 gen(3);
  const auto x = oracle::random_matrix(gen, 20, 2);
  const auto one = minibatch_kmeans(x, {.k = 1, .seed = 1, .batch_size = 5});
  CHECK(std::all_of(one.labels.begin(), one.labels.end(), [](int l) { return l == 0; }));

  const auto b = blobs(4, 50, 20.0);
  const auto mb = minibatch_kmeans(b, {.k = 2, .seed = 2, .batch_size = 10, .n_batches = 200});
  const auto km = kmeans(b, {.k = 2, .seed = 2});
  CHECK(agreement2(mb.labels, km.labels) >= 0.98);
}

TEST_CASE("ward: hand-run merge order on four points") {
  const auto x = line({0, 1, 9, 10});
  const auto path = ward_merge_path(x);
  REQUIRE(path.size() == 3);
  CHECK(path[0].a == 0);
  CHECK(path[0].b == 1);
  CHECK(path[0].delta == 0.5);
  CHECK(path[1].a == 2);
  CHECK(path[1].b == 3);
  CHECK(path[1].delta == 0.5);
  CHECK(path[2].a == 0);
  CHECK(path[2].b == 2);
  CHECK(path[2].delta == doctest::Approx(81.0));
  CHECK(agglomerative_ward(x, 2).labels == std::vector<int>{0, 0, 1, 1});
  CHECK(agglomerative_ward(x, 4).labels == std::vector<int>{0, 1, 2, 3});
  CHECK(agglomerative_ward(x, 1).labels == std::vector<int>{0, 0, 0, 0});
  CHECK_THROWS_AS(agglomerative_ward(x, 5), ConfigError);
}

TEST_CASE("ward: merge path matches the step-by-step oracle") {
  std::mt19937_64 gen(17);
  for (int t = 0; t < 40; ++t) {
    const auto x = oracle::random_matrix(gen, 2 + gen() % 5, 1 + gen() % 3);
    const auto got = ward_merge_path(x);
    const auto want = oracle::ward_steps(x);
    REQUIRE(got.size() == want.size());
    for (std::size_t s = 0; s < got.size(); ++s) {
      CHECK(got[s].a == want[s].a);
      CHECK(got[s].b == want[s].b);
      CHECK(got[s].delta == doctest::Approx(want[s].delta).epsilon(1e-10));
    }
  }
}

TEST_CASE("ward: SSE does not fall as k decreases") {
  std::mt19937_64 gen(19);
  const auto x = oracle::random_matrix(gen, 25, 3);
  const auto path = ward_merge_path(x);
  double prev = 0.0;
  for (std::size_t k = x.rows(); k >= 1; --k) {
    const double sse = within_cluster_sse(x, cut_merge_path(x.rows(), path, k), k);
    CHECK(sse >= prev - 1e-12);
    prev = sse;
  }
}

TEST_CASE("birch: clustering features add") {
  std::mt19937_64 gen(23);
  const auto x = oracle::random_matrix(gen, 6, 3);
  ClusteringFeature sum;
  for (std::size_t i = 0; i < 6; ++i) sum += ClusteringFeature::of_point(x.row(i));
  CHECK(sum.n == 6.0);
  double ss = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    double ls = 0.0;
    for (std::size_t i = 0; i < 6; ++i) ls += x(i, j);
    CHECK(sum.linear_sum[j] == doctest::Approx(ls).epsilon(1e-12));
  }
  for (double v : x.data()) ss += v * v;
  CHECK(sum.square_sum == doctest::Approx(ss).epsilon(1e-12));
  const std::vector<int> one(6, 0);
  CHECK(sum.radius() * sum.radius() == doctest::Approx(oracle::sse_of(x, one, 1) / 6.0));
}

TEST_CASE("birch: a threshold wider than the data gives one entry") {
  std::mt19937_64 gen(29);
  const auto x = oracle::random_matrix(gen, 30, 2);
  const auto fit = birch_fit(x, {.k = 1, .threshold = 100.0});
  CHECK(fit.leaf_entries.size() == 1);
  CHECK(std::all_of(fit.assignment.labels.begin(), fit.assignment.labels.end(),
                    [](int l) { return l == 0; }));
  CHECK_THROWS_AS(birch(x, {.k = 2, .threshold = 100.0}), ConfigError);
  CHECK_THROWS_AS(birch(x, {.k = 2, .threshold = 0.0}), ConfigError);
}

TEST_CASE("birch: leaf entries summarise their points") {
  const auto x = blobs(31, 40, 8.0);
  const auto fit = birch_fit(x, {.k = 2, .threshold = 0.7, .branching_factor = 4});
  std::vector<ClusteringFeature> rebuilt(fit.leaf_entries.size());
  for (std::size_t i = 0; i < x.rows(); ++i) rebuilt[fit.point_entry[i]] += ClusteringFeature::of_point(x.row(i));
  for (std::size_t e = 0; e < rebuilt.size(); ++e) {
    CHECK(rebuilt[e].n == fit.leaf_entries[e].n);
    CHECK(rebuilt[e].square_sum == doctest::Approx(fit.leaf_entries[e].square_sum).epsilon(1e-9));
  }
}

TEST_CASE("birch and spectral agree with kmeans on separated blobs") {
  const auto x = blobs(37, 30, 12.0);
  const auto km = kmeans(x, {.k = 2, .seed = 1});
  CHECK(same_partition(birch(x, {.k = 2, .threshold = 0.5}).labels, km.labels));
  CHECK(same_partition(spectral(x, 2, 1).labels, km.labels));
  CHECK(same_partition(agglomerative_ward(x, 2).labels, km.labels));
}

TEST_CASE("duplicating a row gives the duplicate its twin's label") {
  const auto x = blobs(41, 20, 15.0);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < x.rows(); ++i) rows.emplace_back(x.row(i).begin(), x.row(i).end());
  rows.push_back(rows[3]);
  const auto xd = Matrix::from_rows(rows);
  const auto check = [&](const std::vector<int>& base, const std::vector<int>& dup) {
    CHECK(dup.back() == dup[3]);
    CHECK(same_partition(base, std::vector<int>(dup.begin(), dup.end() - 1)));
  };
  check(kmeans(x, {.k = 2, .seed = 3}).labels, kmeans(xd, {.k = 2, .seed = 3}).labels);
  check(minibatch_kmeans(x, {.k = 2, .seed = 3}).labels, minibatch_kmeans(xd, {.k = 2, .seed = 3}).labels);
  check(agglomerative_ward(x, 2).labels, agglomerative_ward(xd, 2).labels);
  check(birch(x, {.k = 2}).labels, birch(xd, {.k = 2}).labels);
  check(spectral(x, 2, 3).labels, spectral(xd, 2, 3).labels);
}

TEST_CASE("jacobi: diagonal input is returned exactly") {
  Matrix d(4, 4);
  d(0, 0) = 3.5;
  d(1, 1) = -2.0;
  d(2, 2) = 0.25;
  d(3, 3) = 7.0;
  const auto e = jacobi_eigen(d);
  CHECK(e.values == std::vector<double>{-2.0, 0.25, 3.5, 7.0});
}

TEST_CASE("jacobi: residuals and small-matrix characteristic polynomials") {
  std::mt19937_64 gen(43);
  for (int t = 0; t < 30; ++t) {
    const auto a = oracle::random_symmetric(gen, 8);
    const auto e = jacobi_eigen(a);
    CHECK(max_residual(a, e) <= 1e-8);
    CHECK(std::is_sorted(e.values.begin(), e.values.end()));
  }
  for (int t = 0; t < 30; ++t) {
    const auto a = oracle::random_symmetric(gen, 2);
    const double tr = a(0, 0) + a(1, 1), det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double disc = std::sqrt(tr * tr / 4 - det);
    const auto e = jacobi_eigen(a);
    CHECK(std::abs(e.values[0] - (tr / 2 - disc)) <= 1e-10);
    CHECK(std::abs(e.values[1] - (tr / 2 + disc)) <= 1e-10);
  }
  for (int t = 0; t < 30; ++t) {
    const auto a = oracle::random_symmetric(gen, 3);
    const auto e = jacobi_eigen(a);
    const auto& l = e.values;
    const double c2 = a(0, 0) * a(1, 1) + a(0, 0) * a(2, 2) + a(1, 1) * a(2, 2) - a(0, 1) * a(0, 1) -
                      a(0, 2) * a(0, 2) - a(1, 2) * a(1, 2);
    const double det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(1, 2)) -
                       a(0, 1) * (a(0, 1) * a(2, 2) - a(1, 2) * a(0, 2)) +
                       a(0, 2) * (a(0, 1) * a(1, 2) - a(1, 1) * a(0, 2));
    CHECK(l[0] + l[1] + l[2] == doctest::Approx(a(0, 0) + a(1, 1) + a(2, 2)).epsilon(1e-10));
    CHECK(l[0] * l[1] + l[0] * l[2] + l[1] * l[2] == doctest::Approx(c2).epsilon(1e-9));
    CHECK(l[0] * l[1] * l[2] == doctest::Approx(det).epsilon(1e-9));
  }
  CHECK_THROWS_AS(jacobi_eigen(line({1, 2})), DataError);
}

TEST_CASE("spectral: zero-degree points and k bounds") {
  CHECK_THROWS_AS(spectral(line({0, 0.001, 0.002, 0.003, 1000}), 2, 1), NumericError);
  CHECK_THROWS_AS(spectral(line({0, 1, 2}), 1, 1), ConfigError);
}

TEST_CASE("silhouette: two tight pairs match the hand formula") {
  const auto x = line({0, 0.1, 10, 10.1});
  const std::vector<int> labels{0, 0, 1, 1};
  const auto r = silhouette(x, labels);
  const double s_outer = 1.0 - 0.1 / 10.05, s_inner = 1.0 - 0.1 / 9.95;
  const double hand = (2 * s_outer + 2 * s_inner) / 4;
  CHECK(r.mean_score >= 0.97);
  CHECK(std::abs(r.mean_score - hand) <= 1e-9);
  CHECK(r.a[0] == doctest::Approx(0.1));
  CHECK(r.b[0] == doctest::Approx(10.05));
}

TEST_CASE("silhouette: singleton and identical-point conventions") {
  const auto r = silhouette(line({0, 1, 2, 50}), std::vector<int>{0, 0, 0, 1});
  CHECK(r.s[3] == 0.0);
  const auto same = silhouette(line({4, 4, 4, 4}), std::vector<int>{0, 1, 0, 1});
  for (double s : same.s) CHECK(s == 0.0);
  CHECK_THROWS_AS(silhouette(line({0, 1, 2}), std::vector<int>{0, 0, 0}), ConfigError);
  CHECK_THROWS_AS(silhouette(line({0, 1, 2}), std::vector<int>{0, 1, 2}), ConfigError);
}

TEST_CASE("silhouette: agrees with the brute-force oracle") {
  std::mt19937_64 gen(47);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 3 + gen() % 48;
    const auto x = oracle::random_matrix(gen, n, 1 + gen() % 4);
    const std::size_t k = 2 + gen() % std::min<std::size_t>(n - 2, 6);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i < k ? i : gen() % k);
    const auto r = silhouette(x, labels);
    CHECK(std::abs(r.mean_score - oracle::silhouette_mean(oracle::distances(x), labels)) <= 1e-9);
    for (double s : r.s) CHECK((s >= -1.0 && s <= 1.0));
  }
}

TEST_CASE("sweep: grid shape and determinism") {
  const auto x = blobs(53, 20, 6.0);
  SweepOptions opt;
  opt.seed = 4;
  const auto full = sweep(x, opt);
  CHECK(full.cells.size() == 70);
  for (const auto& c : full.cells) {
    CHECK(c.error.empty());
    CHECK(c.silhouette.has_value());
  }
  const auto again = sweep(x, opt);
  for (std::size_t i = 0; i < full.cells.size(); ++i)
    CHECK(full.cells[i].assignment->labels == again.cells[i].assignment->labels);

  SweepOptions one;
  one.algorithms = {Algorithm::kmeans};
  one.k_min = one.k_max = 2;
  const auto single = sweep(x, one);
  CHECK(single.cells.size() == 1);
  CHECK(single.cell(Algorithm::kmeans, 2).assignment->k == 2);
}

TEST_CASE("sweep: failing cells are recorded, not thrown") {
  const auto x = line({0, 0, 0, 0, 0, 1});
  SweepOptions opt;
  opt.algorithms = {Algorithm::kmeans, Algorithm::spectral};
  opt.k_min = 2;
  opt.k_max = 3;
  const auto r = sweep(x, opt);
  CHECK(r.cells.size() == 4);
  CHECK_FALSE(r.cell(Algorithm::spectral, 2).error.empty());
  CHECK(r.cell(Algorithm::kmeans, 2).error.empty());
}

TEST_CASE("algorithm names parse") {
  CHECK(parse_algorithm_list("all").size() == 5);
  CHECK(parse_algorithm_list("kmeans,birch") == std::vector<Algorithm>{Algorithm::kmeans, Algorithm::birch});
  CHECK_THROWS_AS(parse_algorithm("dbscan"), ConfigError);
}
