#include "valfind/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "default_data.hpp"
#include "valfind/error.hpp"
#include "valfind/numfmt.hpp"

namespace valfind::textprep {

namespace {

StopwordSet parse_stopwords(std::istream& in) {
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace(t);
  }
  return out;
}

std::unordered_map<std::string, std::string> parse_exceptions(std::istream& in,
                                                              const std::string& origin) {
  std::unordered_map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(origin + " line " + std::to_string(lineno) + ": expected surface<TAB>lemma");
    }
    auto surface = trim(std::string_view(line).substr(0, tab));
    auto lemma = trim(std::string_view(line).substr(tab + 1));
    if (surface.empty() || lemma.empty()) {
      throw DataError(origin + " line " + std::to_string(lineno) + ": empty surface or lemma");
    }
    out.emplace(std::string(surface), std::string(lemma));
  }
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// First matching suffix rule, or nothing when no rule fires.
std::optional<std::string> apply_rule(std::string_view t) {
  if (ends_with(t, "ies") && t.size() >= 5) return std::string(t.substr(0, t.size() - 3)) + "y";
  if (ends_with(t, "sses")) return std::string(t.substr(0, t.size() - 2));
  if (ends_with(t, "ing") && t.size() >= 6) return std::string(t.substr(0, t.size() - 3));
  if (ends_with(t, "ed") && t.size() >= 5) return std::string(t.substr(0, t.size() - 2));
  if (ends_with(t, "s") && t.size() >= 4 && !ends_with(t, "ss") && !ends_with(t, "us") &&
      !ends_with(t, "is")) {
    return std::string(t.substr(0, t.size() - 1));
  }
  return std::nullopt;
}

// Decodes one UTF-8 code point at s[i]; returns 0xFFFD and advances one byte
// on malformed input.
char32_t decode(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) {
    ++i;
    return 0xFFFD;
  }
  char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Word characters: ASCII letters/digits and non-ASCII code points outside
// the common punctuation, symbol and space blocks.
bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
  }
  if (cp == 0xFFFD) return false;
  if (cp <= 0xBF || cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if ((cp >= 0xFF00 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
      (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65)) {
    return false;
  }
  if (cp >= 0x1F000) return false;  // emoji and pictographs
  return true;
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

}  // namespace

const StopwordSet& default_stopwords() {
  static const StopwordSet kSet = [] {
    std::istringstream in{std::string(detail::default_stopwords_text())};
    return parse_stopwords(in);
  }();
  return kSet;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword file " + path.string());
  return parse_stopwords(in);
}

Lemmatizer::Lemmatizer() {
  std::istringstream in{std::string(detail::default_lemma_exceptions_text())};
  exceptions_ = parse_exceptions(in, "builtin lemma table");
}

Lemmatizer::Lemmatizer(std::unordered_map<std::string, std::string> exceptions)
    : exceptions_(std::move(exceptions)) {}

Lemmatizer Lemmatizer::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lemma exception file " + path.string());
  return Lemmatizer(parse_exceptions(in, path.string()));
}

std::string Lemmatizer::lemmatize(std::string_view token) const {
  std::string t(token);
  // Every step shortens the word or follows the exception table, and the
  // loop only exits at a fixed point, which makes the mapping idempotent.
  // The guard stops exception-table cycles.
  for (int guard = 0; guard < 64; ++guard) {
    if (auto it = exceptions_.find(t); it != exceptions_.end()) {
      if (it->second == t) return t;
      t = it->second;
      continue;
    }
    auto next = apply_rule(t);
    if (!next) return t;
    t = std::move(*next);
  }
  return t;
}

const Lemmatizer& default_lemmatizer() {
  static const Lemmatizer kLemmatizer;
  return kLemmatizer;
}

std::string lemmatize(std::string_view token) { return default_lemmatizer().lemmatize(token); }

TokenSequence preprocess(std::string_view text, const StopwordSet& stopwords,
                         const Lemmatizer& lemmatizer, SourceField field) {
  TokenSequence out;
  out.source_field = field;
  std::string cur;
  std::size_t cur_len = 0;
  bool all_digits = true;

  auto flush = [&] {
    if (cur_len >= 2 && !all_digits && !stopwords.contains(cur)) {
      auto lemma = lemmatizer.lemmatize(cur);
      if (!stopwords.contains(lemma)) out.tokens.push_back(std::move(lemma));
    }
    cur.clear();
    cur_len = 0;
    all_digits = true;
  };

  for (std::size_t i = 0; i < text.size();) {
    const char32_t cp = decode(text, i);
    if (!is_word_char(cp)) {
      flush();
      continue;
    }
    if (!(cp >= '0' && cp <= '9')) all_digits = false;
    encode(to_lower(cp), cur);
    ++cur_len;
  }
  flush();
  return out;
}

// --- Vocabulary ---------------------------------------------------------------

Vocabulary Vocabulary::build(std::span<const TokenSequence> sequences, std::size_t min_df) {
  if (min_df < 1) throw ConfigError("min_df must be >= 1");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& seq : sequences) {
    std::vector<std::string_view> uniq(seq.tokens.begin(), seq.tokens.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto t : uniq) ++df[std::string(t)];
  }
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto& [t, c] : df) {
    if (c >= min_df) entries.emplace_back(t, c);
  }
  if (entries.empty()) {
    throw DataError("no token reaches document frequency " + std::to_string(min_df));
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return from_entries(std::move(entries), min_df);
}

Vocabulary Vocabulary::from_entries(std::vector<std::pair<std::string, std::size_t>> entries,
                                    std::size_t min_df) {
  Vocabulary v;
  v.min_df_ = min_df;
  for (auto& [t, c] : entries) {
    if (c < min_df) throw DataError("vocabulary token '" + t + "' is below min_df");
    if (!v.index_.emplace(t, v.tokens_.size()).second) {
      throw DataError("duplicate vocabulary token '" + t + "'");
    }
    v.tokens_.push_back(std::move(t));
    v.df_.push_back(c);
  }
  return v;
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t BagOfTokens::total() const {
  std::uint64_t s = 0;
  for (auto& [i, c] : counts) s += c;
  return s;
}

BagOfTokens& BagOfTokens::operator+=(const BagOfTokens& other) {
  for (auto& [i, c] : other.counts) counts[i] += c;
  return *this;
}

BagOfTokens vectorize(const TokenSequence& sequence, const Vocabulary& vocab) {
  BagOfTokens bag;
  for (const auto& t : sequence.tokens) {
    if (auto idx = vocab.index_of(t)) ++bag.counts[*idx];
  }
  return bag;
}

}  // namespace valfind::textprep
