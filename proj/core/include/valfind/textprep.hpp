#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace valfind::textprep {

enum class SourceField { title, description };

struct TokenSequence {
  std::vector<std::string> tokens;
  SourceField source_field = SourceField::description;

  bool operator==(const TokenSequence&) const = default;
};

using StopwordSet = std::unordered_set<std::string>;

/// The shipped English stopword list.
const StopwordSet& default_stopwords();
/// One token per line; blank lines and lines starting with '#' are skipped.
StopwordSet load_stopwords(const std::filesystem::path& path);

// Rule-based lemmatizer: an exception table first, then ordered suffix
// rules. A table entry mapping a word to itself freezes that word.
class Lemmatizer {
 public:
  Lemmatizer();  // shipped exception table
  explicit Lemmatizer(std::unordered_map<std::string, std::string> exceptions);

  /// "surface<TAB>lemma" per line.
  static Lemmatizer from_file(const std::filesystem::path& path);

  /// Idempotent: lemmatize(lemmatize(t)) == lemmatize(t).
  std::string lemmatize(std::string_view token) const;

 private:
  std::unordered_map<std::string, std::string> exceptions_;
};

const Lemmatizer& default_lemmatizer();

/// Lemmatize with the shipped exception table.
std::string lemmatize(std::string_view token);

/// Lowercase, split on non-alphanumeric boundaries, drop numeric and
/// one-character tokens, remove stopwords, lemmatize.
TokenSequence preprocess(std::string_view text, const StopwordSet& stopwords,
                         const Lemmatizer& lemmatizer = default_lemmatizer(),
                         SourceField field = SourceField::description);

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Tokens with document frequency >= min_df, ordered by descending df,
  /// ties lexicographic. Throws DataError when nothing survives.
  static Vocabulary build(std::span<const TokenSequence> sequences, std::size_t min_df);
  /// Rebuild from an explicit (token, df) list in index order.
  static Vocabulary from_entries(std::vector<std::pair<std::string, std::size_t>> entries,
                                 std::size_t min_df);

  std::size_t size() const { return tokens_.size(); }
  std::size_t min_df() const { return min_df_; }
  std::optional<std::size_t> index_of(std::string_view token) const;
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  std::size_t document_frequency(std::size_t index) const { return df_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& o) const {
    return tokens_ == o.tokens_ && df_ == o.df_ && min_df_ == o.min_df_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t min_df_ = 1;
};

// Sparse token counts keyed by vocabulary column.
struct BagOfTokens {
  std::map<std::size_t, std::uint32_t> counts;

  std::uint64_t total() const;
  BagOfTokens& operator+=(const BagOfTokens& other);
  bool operator==(const BagOfTokens&) const = default;
};

BagOfTokens vectorize(const TokenSequence& sequence, const Vocabulary& vocab);

}  // namespace valfind::textprep
