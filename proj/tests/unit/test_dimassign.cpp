#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "valfind/dimassign.hpp"
#include "valfind/error.hpp"

using namespace valfind;
using namespace valfind::dimassign;

namespace {

struct Instance {
  std::vector<int> cluster_of, label_of;
  std::size_t k = 0;
  std::vector<std::string> names;
  ClusterLabelProfile profile() const { return ClusterLabelProfile::build(cluster_of, label_of, k, names); }
};

Instance random_instance(std::mt19937_64& gen, std::size_t n, std::size_t k, std::size_t labels) {
  Instance in;
  in.k = k;
  for (std::size_t l = 0; l < labels; ++l) in.names.push_back("L" + std::to_string(l));
  for (std::size_t i = 0; i < n; ++i) {
    in.cluster_of.push_back(static_cast<int>(i < k ? i : gen() % k));
    // Skewed labels so that some are rarely modal.
    const auto u = gen() % (labels * labels);
    in.label_of.push_back(static_cast<int>(labels - 1 - static_cast<std::size_t>(std::sqrt(static_cast<double>(u)))));
  }
  return in;
}

Instance from_counts(const std::vector<std::vector<std::size_t>>& counts, std::vector<std::string> names) {
  Instance in;
  in.k = counts.size();
  in.names = std::move(names);
  for (std::size_t c = 0; c < counts.size(); ++c)
    for (std::size_t l = 0; l < counts[c].size(); ++l)
      for (std::size_t t = 0; t < counts[c][l]; ++t) {
        in.cluster_of.push_back(static_cast<int>(c));
        in.label_of.push_back(static_cast<int>(l));
      }
  return in;
}

}  // namespace

TEST_CASE("profile: counts and totals") {
  const auto p = from_counts({{2, 1}, {0, 4}}, {"A", "B"}).profile();
  CHECK(p.cluster_size(1) == 4);
  CHECK(p.label_total(1) == 5);
  CHECK(p.total() == 7);
  CHECK_THROWS_AS(ClusterLabelProfile::build(std::vector<int>{0, 3}, std::vector<int>{0, 0}, 2, {"A"}),
                  DataError);
}

TEST_CASE("majority_assign: modal label and tie-breaks") {
  CHECK(majority_assign(from_counts({{2, 1}}, {"A", "B"}).profile()) == std::vector<int>{0});
  // Tied cluster {A:1, B:1}; corpus holds 10 A and 5 B.
  CHECK(majority_assign(from_counts({{1, 1}, {9, 4}}, {"A", "B"}).profile())[0] == 0);
  CHECK(majority_assign(from_counts({{1, 1}, {4, 9}}, {"A", "B"}).profile())[0] == 1);
  CHECK(majority_assign(from_counts({{1, 1}}, {"B", "A"}).profile())[0] == 1);
}

TEST_CASE("majority_assign: agrees with an argmax recomputation") {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 50; ++t) {
    const auto in = random_instance(gen, 60, 3, 9);
    const auto p = in.profile();
    const auto got = majority_assign(p);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& row = p.counts[c];
      const auto top = *std::max_element(row.begin(), row.end());
      CHECK(row[static_cast<std::size_t>(got[c])] == top);
    }
  }
}

TEST_CASE("majority_accuracy: examples") {
  const auto p = from_counts({{3, 1}}, {"A", "B"}).profile();
  const auto t = majority_accuracy(p, majority_assign(p));
  CHECK(*t.per_label[0] == 1.0);
  CHECK(*t.per_label[1] == 0.0);
  CHECK(t.total == 0.75);

  Instance singletons;
  singletons.k = 5;
  singletons.names = {"A", "B", "C"};
  singletons.cluster_of = {0, 1, 2, 3, 4};
  singletons.label_of = {0, 1, 2, 1, 0};
  const auto sp = singletons.profile();
  const auto st = majority_accuracy(sp, majority_assign(sp));
  for (const auto& a : st.per_label) CHECK(*a == 1.0);
  CHECK(st.total == 1.0);
  CHECK(share_accuracy(sp).total == 1.0);
}

TEST_CASE("majority_accuracy: absent labels are NA") {
  const auto p = from_counts({{3, 0, 1}}, {"A", "B", "C"}).profile();
  const auto t = majority_accuracy(p, majority_assign(p));
  CHECK_FALSE(t.per_label[1].has_value());
  CHECK(*t.per_label[2] == 0.0);
  CHECK_FALSE(share_accuracy(p).per_label[1].has_value());
}

TEST_CASE("majority_accuracy: matches a point-by-point simulation") {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 20; ++t) {
    const auto in = random_instance(gen, 100, 6, 4);
    const auto p = in.profile();
    const auto map = majority_assign(p);
    const auto table = majority_accuracy(p, map);
    std::vector<double> hit(4, 0), seen(4, 0);
    for (std::size_t i = 0; i < 100; ++i) {
      const auto l = static_cast<std::size_t>(in.label_of[i]);
      seen[l] += 1;
      hit[l] += map[static_cast<std::size_t>(in.cluster_of[i])] == in.label_of[i];
    }
    double total = 0;
    for (std::size_t l = 0; l < 4; ++l) {
      total += hit[l];
      if (seen[l] > 0) CHECK(*table.per_label[l] == doctest::Approx(hit[l] / seen[l]).epsilon(1e-15));
    }
    CHECK(table.total == doctest::Approx(total / 100).epsilon(1e-15));
  }
}

TEST_CASE("share_accuracy: closed form examples") {
  const auto t = share_accuracy(from_counts({{3, 1}}, {"A", "B"}).profile());
  CHECK(*t.per_label[0] == 0.75);
  CHECK(*t.per_label[1] == 0.25);
  const auto pure = share_accuracy(from_counts({{4, 0}, {0, 2}}, {"A", "B"}).profile());
  CHECK(*pure.per_label[0] == 1.0);
  CHECK(*pure.per_label[1] == 1.0);
}

TEST_CASE("share_accuracy: Monte Carlo agreement") {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 5; ++t) {
    const auto in = random_instance(gen, 150, 5, 6);
    const double mc = oracle::share_monte_carlo(in.cluster_of, in.label_of, 100000, gen());
    CHECK(std::abs(share_accuracy(in.profile()).total - mc) <= 0.01);
  }
}

TEST_CASE("accuracy tables: bounds and support-weighted mean") {
  std::mt19937_64 gen(7);
  for (int t = 0; t < 50; ++t) {
    const auto in = random_instance(gen, 80, 1 + gen() % 8, 5);
    const auto p = in.profile();
    const auto maj = majority_accuracy(p, majority_assign(p));
    const auto sh = share_accuracy(p);
    CHECK(sh.total <= maj.total + 1e-12);
    for (const auto* table : {&maj, &sh}) {
      double weighted = 0.0;
      for (std::size_t l = 0; l < p.labels(); ++l) {
        if (!table->per_label[l]) continue;
        CHECK((*table->per_label[l] >= 0.0 && *table->per_label[l] <= 1.0));
        weighted += *table->per_label[l] * static_cast<double>(p.label_total(l));
      }
      CHECK(weighted / static_cast<double>(p.total()) == doctest::Approx(table->total).epsilon(1e-12));
    }
  }
}

TEST_CASE("majority total never falls under refinement") {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 50; ++t) {
    auto in = random_instance(gen, 70, 4, 5);
    const auto p = in.profile();
    const double before = majority_accuracy(p, majority_assign(p)).total;
    const int target = static_cast<int>(gen() % in.k);
    bool moved = false;
    for (auto& c : in.cluster_of) {
      if (c == target && gen() % 2) {
        c = static_cast<int>(in.k);
        moved = true;
      }
    }
    if (!moved) continue;
    ++in.k;
    const auto q = in.profile();
    bool empty = false;
    for (std::size_t c = 0; c < in.k; ++c) empty |= q.cluster_size(c) == 0;
    if (empty) continue;
    CHECK(majority_accuracy(q, majority_assign(q)).total >= before - 1e-15);
  }
}

TEST_CASE("sampled_share_assign: purity, frequency and determinism") {
  const auto pure = from_counts({{0, 5}}, {"A", "B"});
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto draws = sampled_share_assign(pure.profile(), pure.cluster_of, s);
    CHECK(std::all_of(draws.begin(), draws.end(), [](int l) { return l == 1; }));
  }
  const auto pair = from_counts({{1, 1}}, {"A", "B"});
  const auto p = pair.profile();
  double a = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) a += sampled_share_assign(p, std::vector<int>{0}, s)[0] == 0;
  CHECK(std::abs(a / 10000 - 0.5) <= 0.02);
  std::mt19937_64 gen(13);
  const auto in = random_instance(gen, 90, 4, 4);
  CHECK(sampled_share_assign(in.profile(), in.cluster_of, 42) ==
        sampled_share_assign(in.profile(), in.cluster_of, 42));
}

TEST_CASE("accuracy_from_predictions and method names") {
  const auto t = accuracy_from_predictions(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 1, 1},
                                           {"A", "B"}, Method::sampled);
  CHECK(*t.per_label[0] == 0.5);
  CHECK(*t.per_label[1] == 1.0);
  CHECK(t.total == 0.75);
  CHECK(t.method == Method::sampled);
  CHECK(parse_method("share") == Method::share);
  CHECK_THROWS_AS(parse_method("vote"), ConfigError);
}
