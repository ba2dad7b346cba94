#include <algorithm>

#include "valfind/clusterlab.hpp"
#include "valfind/error.hpp"

namespace valfind::clusterlab {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kmeans: return "kmeans";
    case Algorithm::minibatch: return "minibatch";
    case Algorithm::agglomerative_ward: return "agglomerative_ward";
    case Algorithm::birch: return "birch";
    case Algorithm::spectral: return "spectral";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  for (auto a : kAllAlgorithms) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown clustering algorithm '" + std::string(s) +
                    "' (kmeans|minibatch|agglomerative_ward|birch|spectral)");
}

std::vector<Algorithm> parse_algorithm_list(std::string_view s) {
  if (s == "all") return {kAllAlgorithms.begin(), kAllAlgorithms.end()};
  std::vector<Algorithm> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    auto name = s.substr(start, comma == std::string_view::npos ? s.npos : comma - start);
    const auto a = parse_algorithm(name);
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void ClusterAssignment::validate(std::size_t rows) const {
  if (labels.size() != rows) throw DataError("assignment has wrong number of labels");
  std::vector<std::size_t> count(k, 0);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= k) throw DataError("cluster label out of range");
    ++count[static_cast<std::size_t>(l)];
  }
  for (auto c : count) {
    if (c == 0) throw DataError("assignment has an empty cluster");
  }
}

std::vector<std::size_t> ClusterAssignment::sizes() const {
  std::vector<std::size_t> count(k, 0);
  for (int l : labels) ++count[static_cast<std::size_t>(l)];
  return count;
}

double within_cluster_sse(const Matrix& x, std::span<const int> labels, std::size_t k) {
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
    if (count[c] == 0) continue;
    for (double& v : means.row(c)) v /= count[c];
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    sse += squared_distance(x.row(i), means.row(static_cast<std::size_t>(labels[i])));
  }
  return sse;
}

}  // namespace valfind::clusterlab
