#include "valfind/dimassign.hpp"

#include <numeric>

#include "valfind/error.hpp"
#include "valfind/rng.hpp"

namespace valfind::dimassign {

std::size_t ClusterLabelProfile::cluster_size(std::size_t c) const {
  return std::accumulate(counts[c].begin(), counts[c].end(), std::size_t{0});
}

std::size_t ClusterLabelProfile::label_total(std::size_t l) const {
  std::size_t s = 0;
  for (const auto& row : counts) s += row[l];
  return s;
}

std::size_t ClusterLabelProfile::total() const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < clusters(); ++c) s += cluster_size(c);
  return s;
}

ClusterLabelProfile ClusterLabelProfile::build(std::span<const int> cluster_of,
                                               std::span<const int> label_of, std::size_t k,
                                               std::vector<std::string> label_names) {
  if (cluster_of.size() != label_of.size()) {
    throw DataError("cluster and label sequences differ in length");
  }
  ClusterLabelProfile p;
  p.label_names = std::move(label_names);
  p.counts.assign(k, std::vector<std::size_t>(p.label_names.size(), 0));
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    const int c = cluster_of[i], l = label_of[i];
    if (c < 0 || static_cast<std::size_t>(c) >= k) throw DataError("cluster index out of range");
    if (l < 0 || static_cast<std::size_t>(l) >= p.label_names.size()) {
      throw DataError("label index out of range");
    }
    ++p.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(l)];
  }
  return p;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::majority: return "majority";
    case Method::share: return "share";
    case Method::sampled: return "sampled";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  if (s == "majority") return Method::majority;
  if (s == "share") return Method::share;
  if (s == "sampled") return Method::sampled;
  throw ConfigError("unknown assignment method '" + std::string(s) + "' (majority|share|sampled)");
}

namespace {

AccuracyTable make_table(const ClusterLabelProfile& p, Method m,
                         const std::vector<double>& correct_per_label) {
  AccuracyTable t;
  t.label_names = p.label_names;
  t.method = m;
  t.k = p.clusters();
  double correct = 0.0;
  for (std::size_t l = 0; l < p.labels(); ++l) {
    const auto n = p.label_total(l);
    if (n == 0) {
      t.per_label.emplace_back(std::nullopt);
      continue;
    }
    t.per_label.emplace_back(correct_per_label[l] / static_cast<double>(n));
    correct += correct_per_label[l];
  }
  const auto total = p.total();
  if (total == 0) throw DataError("accuracy of an empty profile");
  t.total = correct / static_cast<double>(total);
  return t;
}

}  // namespace

std::vector<int> majority_assign(const ClusterLabelProfile& p) {
  std::vector<std::size_t> corpus(p.labels());
  for (std::size_t l = 0; l < p.labels(); ++l) corpus[l] = p.label_total(l);
  std::vector<int> out(p.clusters());
  for (std::size_t c = 0; c < p.clusters(); ++c) {
    if (p.cluster_size(c) == 0) throw DataError("majority assignment of an empty cluster");
    std::size_t best = 0;
    for (std::size_t l = 1; l < p.labels(); ++l) {
      const auto& row = p.counts[c];
      if (row[l] != row[best]) {
        if (row[l] > row[best]) best = l;
      } else if (corpus[l] != corpus[best]) {
        if (corpus[l] > corpus[best]) best = l;
      } else if (p.label_names[l] < p.label_names[best]) {
        best = l;
      }
    }
    out[c] = static_cast<int>(best);
  }
  return out;
}

AccuracyTable majority_accuracy(const ClusterLabelProfile& p, std::span<const int> assignment) {
  if (assignment.size() != p.clusters()) throw DataError("assignment map must cover every cluster");
  std::vector<double> correct(p.labels(), 0.0);
  for (std::size_t c = 0; c < p.clusters(); ++c) {
    const int l = assignment[c];
    if (l < 0 || static_cast<std::size_t>(l) >= p.labels()) {
      throw DataError("assignment maps a cluster to an unknown label");
    }
    correct[static_cast<std::size_t>(l)] += static_cast<double>(p.counts[c][static_cast<std::size_t>(l)]);
  }
  return make_table(p, Method::majority, correct);
}

AccuracyTable share_accuracy(const ClusterLabelProfile& p) {
  std::vector<double> correct(p.labels(), 0.0);
  for (std::size_t c = 0; c < p.clusters(); ++c) {
    const double size = static_cast<double>(p.cluster_size(c));
    if (size == 0) throw DataError("share accuracy of an empty cluster");
    for (std::size_t l = 0; l < p.labels(); ++l) {
      const double n = static_cast<double>(p.counts[c][l]);
      correct[l] += n * n / size;
    }
  }
  return make_table(p, Method::share, correct);
}

std::vector<int> sampled_share_assign(const ClusterLabelProfile& p, std::span<const int> cluster_of,
                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> out(cluster_of.size());
  for (std::size_t i = 0; i < cluster_of.size(); ++i) {
    const auto c = static_cast<std::size_t>(cluster_of[i]);
    if (c >= p.clusters()) throw DataError("cluster index out of range");
    const auto size = p.cluster_size(c);
    if (size == 0) throw DataError("sampling from an empty cluster");
    auto u = rng.below(size);
    std::size_t l = 0;
    while (u >= p.counts[c][l]) u -= p.counts[c][l++];
    out[i] = static_cast<int>(l);
  }
  return out;
}

AccuracyTable accuracy_from_predictions(std::span<const int> truth, std::span<const int> predicted,
                                        std::vector<std::string> label_names, Method method) {
  if (truth.size() != predicted.size()) throw DataError("prediction count differs from truth count");
  const std::vector<int> single(truth.size(), 0);
  auto profile = ClusterLabelProfile::build(single, truth, 1, std::move(label_names));
  std::vector<double> correct(profile.labels(), 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == predicted[i]) correct[static_cast<std::size_t>(truth[i])] += 1.0;
  }
  auto t = make_table(profile, method, correct);
  t.k = 0;
  return t;
}

}  // namespace valfind::dimassign
