#include <doctest.h>

#include <map>
#include <set>
#include <random>

#include "valfind/corpus.hpp"
#include "valfind/error.hpp"
#include "valfind/textprep.hpp"

using namespace valfind;
using namespace valfind::textprep;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> l) {
  return {l.begin(), l.end()};
}

}  // namespace

TEST_CASE("preprocess: punctuation, case and custom stopwords") {
  const StopwordSet stop{"the", "is"};
  CHECK(preprocess("The model's AUC is low.", stop).tokens == toks({"model", "auc", "low"}));
  CHECK(preprocess("", stop).tokens.empty());
  CHECK(preprocess("12 2023 7.5", stop).tokens.empty());
  CHECK(preprocess("x y", stop).tokens.empty());
}

TEST_CASE("preprocess: suffix rules collapse inflections") {
  CHECK(preprocess("Models modeled modeling", default_stopwords()).tokens ==
        toks({"model", "model", "model"}));
  CHECK(preprocess("abc", {}, default_lemmatizer(), SourceField::title).source_field ==
        SourceField::title);
}

TEST_CASE("lemmatize: table entries and suffix rules") {
  CHECK(lemmatize("documents") == "document");
  CHECK(lemmatize("moc") == "moc");
  CHECK(lemmatize("criteria") == "criterion");
  CHECK(lemmatize("policies") == "policy");
  CHECK(lemmatize("classes") == "class");
  CHECK(lemmatize("is") == "is");
  Lemmatizer frozen(std::unordered_map<std::string, std::string>{{"documents", "documents"}});
  CHECK(frozen.lemmatize("documents") == "documents");
}

TEST_CASE("lemmatize: idempotent over a 1000-word sample") {
  std::mt19937_64 gen(11);
  const std::vector<std::string> suffixes{"", "s", "es", "ies", "sses", "ed", "ing", "ings", "eds"};
  for (int i = 0; i < 1000; ++i) {
    std::string w;
    const auto len = 1 + gen() % 8;
    for (std::size_t j = 0; j < len; ++j) w += static_cast<char>('a' + gen() % 26);
    w += suffixes[gen() % suffixes.size()];
    const auto once = lemmatize(w);
    CHECK_MESSAGE(lemmatize(once) == once, w);
  }
}

TEST_CASE("preprocess: no stopword survives on random text") {
  const auto& stop = default_stopwords();
  std::vector<std::string> words(stop.begin(), stop.end());
  for (auto w : {"Model", "DATA", "were", "tested", "it's", "Résumé", "as", "does", "being"})
    words.push_back(w);
  std::mt19937_64 gen(3);
  for (int t = 0; t < 200; ++t) {
    std::string text;
    for (int j = 0; j < 20; ++j) text += words[gen() % words.size()] + (gen() % 3 ? " " : ", ");
    for (const auto& tok : preprocess(text, stop).tokens) {
      CHECK(stop.count(tok) == 0);
      for (char c : tok) CHECK_FALSE((c == ' ' || (c >= 'A' && c <= 'Z') || c == ',' || c == '\''));
    }
  }
}

TEST_CASE("Vocabulary: min_df, ordering and errors") {
  const std::vector<TokenSequence> docs{{toks({"a", "b"})}, {toks({"a"})}};
  const auto v2 = Vocabulary::build(docs, 2);
  CHECK(v2.tokens() == toks({"a"}));
  const auto v1 = Vocabulary::build(docs, 1);
  CHECK(v1.tokens() == toks({"a", "b"}));
  CHECK(*v1.index_of("b") == 1);
  CHECK_FALSE(v1.index_of("c").has_value());
  CHECK_THROWS_AS(Vocabulary::build(docs, 3), DataError);
  const std::vector<TokenSequence> tie{{toks({"z", "y"})}, {toks({"y", "z"})}};
  CHECK(Vocabulary::build(tie, 1).tokens() == toks({"y", "z"}));
}

TEST_CASE("Vocabulary: document frequencies match a counter") {
  corpus::SyntheticOptions opt;
  opt.n = 100;
  std::vector<TokenSequence> seqs;
  for (const auto& f : corpus::generate_synthetic_corpus(opt))
    seqs.push_back(preprocess(f.description, default_stopwords()));
  std::map<std::string, std::size_t> df;
  for (const auto& s : seqs) {
    std::set<std::string> seen(s.tokens.begin(), s.tokens.end());
    for (const auto& t : seen) ++df[t];
  }
  const auto vocab = Vocabulary::build(seqs, 2);
  std::size_t expected_size = 0;
  for (const auto& [t, n] : df) expected_size += n >= 2;
  CHECK(vocab.size() == expected_size);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    CHECK(vocab.document_frequency(i) == df[vocab.token(i)]);
    if (i > 0) CHECK(vocab.document_frequency(i - 1) >= vocab.document_frequency(i));
  }
}

TEST_CASE("vectorize: counts, out-of-vocabulary and linearity") {
  const auto vocab = Vocabulary::from_entries({{"model", 3}}, 1);
  const auto bag = vectorize({toks({"model", "model", "auc"})}, vocab);
  CHECK(bag.counts == std::map<std::size_t, std::uint32_t>{{0, 2}});
  CHECK(vectorize({}, vocab).counts.empty());

  std::mt19937_64 gen(9);
  const std::vector<std::string> pool{"a", "b", "c", "d", "e", "f"};
  const auto v = Vocabulary::from_entries({{"a", 5}, {"c", 4}, {"e", 2}}, 1);
  for (int t = 0; t < 100; ++t) {
    TokenSequence s1, s2;
    for (auto n = gen() % 10; n > 0; --n) s1.tokens.push_back(pool[gen() % pool.size()]);
    for (auto n = gen() % 10; n > 0; --n) s2.tokens.push_back(pool[gen() % pool.size()]);
    std::uint64_t in_vocab = 0;
    for (const auto& tok : s1.tokens) in_vocab += tok == "a" || tok == "c" || tok == "e";
    const auto b1 = vectorize(s1, v);
    CHECK(b1.total() == in_vocab);
    TokenSequence both = s1;
    both.tokens.insert(both.tokens.end(), s2.tokens.begin(), s2.tokens.end());
    auto sum = b1;
    sum += vectorize(s2, v);
    CHECK(vectorize(both, v) == sum);
  }
}
