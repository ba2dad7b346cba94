#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "../support/oracles.hpp"
#include "valfind/attriblab.hpp"
#include "valfind/corpus.hpp"
#include "valfind/error.hpp"
#include "valfind/textprep.hpp"

using namespace valfind;
using namespace valfind::attriblab;
using embedspace::Block;
using embedspace::FeatureLayout;

namespace {

std::vector<std::string> classes(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("k" + std::to_string(i));
  return out;
}

// Title bag {alpha, beta, gamma, delta}, description bag {alpha, eps}, 2 + 2 embedding dims.
FeatureLayout small_layout() {
  return FeatureLayout({"alpha", "beta", "gamma", "delta"}, {"alpha", "eps"}, 2, 2);
}

struct Data {
  Matrix x;
  std::vector<int> y;
};

// Class 1 exactly when "gamma" appears in the title; everything else is noise.
Data token_determined(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0, 1);
  Data d{Matrix(n, 10), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < 6; ++f) d.x(i, f) = static_cast<double>(gen() % 3);
    for (std::size_t f = 6; f < 10; ++f) d.x(i, f) = noise(gen);
    d.x(i, 2) = static_cast<double>(i % 2 ? gen() % 2 + 1 : 0);
    d.y[i] = d.x(i, 2) > 0 ? 1 : 0;
  }
  return d;
}

}  // namespace

TEST_CASE("rank_tokens_gain: the deciding token ranks first") {
  const auto d = token_determined(1, 80);
  const auto layout = small_layout();
  const auto m = boostlab::train_boosted(d.x, d.y, classes(2), {.rounds = 10, .max_depth = 2});
  const auto r = rank_tokens_gain(m, layout, 3);
  for (const auto& list : r.per_class) {
    REQUIRE_FALSE(list.empty());
    CHECK(list.front().token == "gamma");
    CHECK(list.size() <= 3);
    for (std::size_t i = 1; i < list.size(); ++i) CHECK(list[i - 1].score >= list[i].score);
  }
  CHECK_THROWS_AS(rank_tokens_gain(m, layout, 0), ConfigError);
  CHECK_THROWS_AS(rank_tokens_gain(m, FeatureLayout::from_widths(1, 1, 1, 1), 3), DataError);
}

TEST_CASE("rank_tokens_gain: empty model and subset bound") {
  const auto d = token_determined(2, 60);
  const auto layout = small_layout();
  const auto none = boostlab::train_boosted(d.x, d.y, classes(2), {.rounds = 0});
  for (const auto& list : rank_tokens_gain(none, layout, 5).per_class) CHECK(list.empty());

  std::mt19937_64 gen(3);
  Data noisy = d;
  for (auto& l : noisy.y) l = static_cast<int>(gen() % 2);
  const auto m = boostlab::train_boosted(noisy.x, noisy.y, classes(2), {.rounds = 8, .max_depth = 3});
  const auto r = rank_tokens_gain(m, layout, 100);
  for (std::size_t c = 0; c < 2; ++c) {
    double reported = 0, total = 0;
    for (const auto& t : r.per_class[c]) reported += t.score;
    std::set<std::size_t> used;
    for (const auto& tree : m.trees[c])
      for (const auto& n : tree.nodes)
        if (!n.is_leaf()) {
          total += std::max(n.gain, 0.0);
          used.insert(static_cast<std::size_t>(n.feature));
        }
    CHECK(reported <= total * (1 + 1e-12));
    // Tokens never split on do not appear.
    std::set<std::string> split_tokens;
    for (auto f : used)
      if (layout.is_bag(f)) split_tokens.insert(layout.describe(f).name);
    for (const auto& t : r.per_class[c]) CHECK(split_tokens.count(t.token) == 1);
  }
}

TEST_CASE("rank_tokens: renaming tokens permutes the rankings") {
  const auto d = token_determined(4, 70);
  const auto m = boostlab::train_boosted(d.x, d.y, classes(2), {.rounds = 6, .max_depth = 3});
  const FeatureLayout renamed({"zulu", "yank", "xray", "whisky"}, {"zulu", "victor"}, 2, 2);
  const std::map<std::string, std::string> rename{{"alpha", "zulu"}, {"beta", "yank"}, {"gamma", "xray"},
                                                  {"delta", "whisky"}, {"eps", "victor"}};
  const auto a = rank_tokens_gain(m, small_layout(), 10), b = rank_tokens_gain(m, renamed, 10);
  for (std::size_t c = 0; c < 2; ++c) {
    std::map<std::string, double> sa, sb;
    for (const auto& t : a.per_class[c]) sa[rename.at(t.token)] = t.score;
    for (const auto& t : b.per_class[c]) sb[t.token] = t.score;
    CHECK(sa == sb);
  }
}

TEST_CASE("rank_tokens_logreg: separable feature first, zero model lexicographic") {
  const auto d = token_determined(5, 60);
  const auto layout = small_layout();
  const auto m = boostlab::train_logreg(d.x, d.y, classes(2), {});
  for (const auto& list : rank_tokens_logreg(m, layout, 2).per_class) CHECK(list.front().token == "gamma");

  boostlab::LogRegModel zero;
  zero.classes = classes(2);
  zero.feature_count = layout.total();
  for (std::size_t f = 0; f < layout.total(); ++f) zero.kept.push_back(f);
  zero.mean.assign(layout.total(), 0.0);
  zero.stdev.assign(layout.total(), 1.0);
  zero.weights = Matrix(2, layout.total());
  zero.intercept = {0.0, 0.0};
  const auto r = rank_tokens_logreg(zero, layout, 3);
  for (const auto& list : r.per_class) {
    REQUIRE(list.size() == 3);
    CHECK(list[0].token == "alpha");
    CHECK(list[1].token == "beta");
    CHECK(list[2].token == "delta");
    for (const auto& t : list) CHECK(t.score == 0.0);
  }
}

TEST_CASE("rankings: gain and logistic scores correlate on synthetic findings") {
  corpus::SyntheticOptions opt;
  opt.n = 400;
  const auto corpus = corpus::generate_synthetic_corpus(opt);
  std::vector<textprep::TokenSequence> seqs;
  for (const auto& f : corpus) seqs.push_back(textprep::preprocess(f.description, textprep::default_stopwords()));
  const auto vocab = textprep::Vocabulary::build(seqs, 5);
  const FeatureLayout layout({}, vocab.tokens(), 0, 0);
  Matrix x(corpus.size(), vocab.size());
  std::vector<int> y(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& [col, n] : textprep::vectorize(seqs[i], vocab).counts) x(i, col) = n;
    y[i] = static_cast<int>(*corpus[i].dimension);
  }
  const auto names = corpus::dimension_names();
  const auto gb = boostlab::train_boosted(x, y, names, {.rounds = 20, .max_depth = 3});
  const auto lr = boostlab::train_logreg(x, y, names, {.epochs = 100});
  const auto rg = rank_tokens_gain(gb, layout, vocab.size());
  const auto rl = rank_tokens_logreg(lr, layout, vocab.size());
  const auto ranks = [](std::vector<double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  double mean_rho = 0;
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::map<std::string, double> logit;
    for (const auto& t : rl.per_class[c]) logit[t.token] = t.score;
    std::vector<double> a, b;
    for (const auto& t : rg.per_class[c]) {
      a.push_back(t.score);
      b.push_back(logit[t.token]);
    }
    // Every token, split on or not, enters the comparison.
    for (const auto& [tok, s] : logit) {
      if (std::none_of(rg.per_class[c].begin(), rg.per_class[c].end(),
                       [&](const RankedToken& t) { return t.token == tok; })) {
        a.push_back(0.0);
        b.push_back(s);
      }
    }
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(ra.size()), m = (n - 1) / 2;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
      num += (ra[i] - m) * (rb[i] - m);
      da += (ra[i] - m) * (ra[i] - m);
      db += (rb[i] - m) * (rb[i] - m);
    }
    mean_rho += num / std::sqrt(da * db) / static_cast<double>(names.size());
  }
  CHECK(mean_rho > 0.0);
}

TEST_CASE("path_attribution: stump routed left") {
  const auto x = Matrix::from_rows({{1, 0}, {2, 0}, {3, 0}, {4, 0}});
  const std::vector<int> y{0, 0, 1, 1};
  const auto m = boostlab::train_boosted(x, y, classes(2), {.rounds = 1, .eta = 0.5, .max_depth = 1});
  const auto& t = m.trees[0][0];
  const auto e = node_expectations(t);
  const auto a = path_attribution(m, std::vector<double>{1.5, 0}, 0);
  CHECK(a.contributions[1] == 0.0);
  CHECK(a.contributions[0] == doctest::Approx(0.5 * (t.nodes[static_cast<std::size_t>(t.nodes[0].left)].weight - e[0])));
  CHECK(a.baseline == doctest::Approx(m.base_score[0] + 0.5 * e[0]));
  // Hessian-weighted root mean of two symmetric leaves.
  CHECK(e[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("path_attribution: empty model and local accuracy") {
  const auto d = token_determined(6, 50);
  const auto none = boostlab::train_boosted(d.x, d.y, classes(2), {.rounds = 0});
  const auto z = path_attribution(none, d.x.row(0), 1);
  CHECK(z.baseline == none.base_score[1]);
  CHECK(std::all_of(z.contributions.begin(), z.contributions.end(), [](double v) { return v == 0.0; }));

  std::mt19937_64 gen(7);
  const auto x = oracle::random_matrix(gen, 120, 10);
  std::vector<int> y(120);
  for (std::size_t i = 0; i < 120; ++i) y[i] = static_cast<int>((x(i, 0) > 0) + (x(i, 3) > 0.3));
  const auto m = boostlab::train_boosted(x, y, classes(3), {.rounds = 4, .max_depth = 4});
  std::set<std::size_t> used;
  for (const auto& per : m.trees)
    for (const auto& t : per)
      for (const auto& n : t.nodes)
        if (!n.is_leaf()) used.insert(static_cast<std::size_t>(n.feature));
  for (std::size_t i = 0; i < 50; ++i) {
    for (int c = 0; c < 3; ++c) {
      const auto a = path_attribution(m, x.row(i), c);
      const double margin = boostlab::predict_margins(m, x.row(i))[static_cast<std::size_t>(c)];
      CHECK(std::abs(a.reconstructed() - margin) <= 1e-9);
      for (std::size_t f = 0; f < 10; ++f)
        if (!used.count(f)) CHECK(a.contributions[f] == 0.0);
    }
  }
}

TEST_CASE("block_summary: zeros, concentration and flat recomputation") {
  const auto layout = small_layout();
  std::vector<AttributionVector> zero(3, AttributionVector{0, 0.0, std::vector<double>(10, 0.0)});
  const auto s0 = block_summary(zero, layout);
  for (double v : s0.mean_abs) CHECK(v == 0.0);

  std::vector<AttributionVector> emb(2, AttributionVector{0, 1.0, std::vector<double>(10, 0.01)});
  emb[0].contributions[7] = -3.0;
  emb[1].contributions[9] = 2.0;
  const auto se = block_summary(emb, layout);
  CHECK(se.mean_abs[3] > se.mean_abs[0]);
  CHECK(se.mean_abs[2] > se.mean_abs[1]);

  std::mt19937_64 gen(8);
  std::normal_distribution<double> u(0, 1);
  std::vector<AttributionVector> rnd(25, AttributionVector{1, 0.0, std::vector<double>(10)});
  for (auto& a : rnd)
    for (auto& v : a.contributions) v = u(gen);
  const auto s = block_summary(rnd, layout);
  CHECK(s.instances == 25);
  const std::vector<std::pair<std::size_t, std::size_t>> ranges{{0, 4}, {4, 6}, {6, 8}, {8, 10}};
  for (std::size_t b = 0; b < 4; ++b) {
    double flat = 0;
    for (const auto& a : rnd)
      for (std::size_t f = ranges[b].first; f < ranges[b].second; ++f) flat += std::abs(a.contributions[f]);
    CHECK(s.mean_abs[b] == doctest::Approx(flat / 25).epsilon(1e-12));
  }
}

TEST_CASE("rankings render as CSV and markdown") {
  TokenRanking r;
  r.classes = {"model_use", "documentation"};
  r.per_class = {{{"decision", 2.5}, {"usage", 1.0}}, {{"document", 4.0}}};
  r.top_k = 2;
  const auto csv = rankings_csv(r);
  CHECK(csv.rfind("class,rank,token,score\n", 0) == 0);
  CHECK(csv.find("model_use,1,decision,2.5\n") != std::string::npos);
  CHECK(csv.find("documentation,1,document,4\n") != std::string::npos);
  const auto md = rankings_markdown(r);
  CHECK(md.find("| model_use | documentation |") != std::string::npos);
  CHECK(md.find("usage") != std::string::npos);
}
