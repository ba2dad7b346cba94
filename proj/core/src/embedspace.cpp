#include "valfind/embedspace.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "valfind/error.hpp"
#include "valfind/numfmt.hpp"
#include "valfind/rng.hpp"

namespace valfind::embedspace {

std::size_t EmbeddingMatrix::row_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return i;
  }
  throw DataError("embedding matrix has no row for id '" + id + "'");
}

void EmbeddingMatrix::validate() const {
  if (ids.size() != values.rows()) throw DataError("embedding id count differs from row count");
  if (values.cols() < 1) throw DataError("embedding dimension must be >= 1");
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (!seen.insert(ids[r]).second) {
      throw DataError("row " + std::to_string(r + 1) + ": duplicate id '" + ids[r] + "'");
    }
    for (double v : values.row(r)) {
      if (!std::isfinite(v)) throw DataError("row " + std::to_string(r + 1) + ": non-finite value");
    }
  }
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

EmbeddingMatrix read_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("EMB1: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto head = split_spaces(line);
  if (head.size() < 3 || head[0] != "EMB1") {
    throw DataError("EMB1: header must be 'EMB1 <n> <d> [model_name]'");
  }
  long long n = 0, d = 0;
  try {
    n = parse_int(head[1]);
    d = parse_int(head[2]);
  } catch (const DataError&) {
    throw DataError("EMB1: header n/d are not integers");
  }
  if (n < 0 || d < 1) throw DataError("EMB1: header requires n >= 0 and d >= 1");

  EmbeddingMatrix m;
  // The model name is the remainder of the header line and may contain spaces.
  if (head.size() > 3) {
    const auto name_pos = static_cast<std::size_t>(head[3].data() - line.data());
    m.model_name = std::string(trim(std::string_view(line).substr(name_pos)));
  }
  m.values = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
  std::unordered_set<std::string> seen;
  for (long long r = 0; r < n; ++r) {
    const std::string where = "EMB1 row " + std::to_string(r + 1);
    if (!std::getline(in, line)) {
      throw DataError(where + ": header declares " + std::to_string(n) + " rows, file has " +
                      std::to_string(r));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto parts = split_spaces(line);
    if (parts.size() != static_cast<std::size_t>(d) + 1) {
      throw DataError(where + ": expected id and " + std::to_string(d) + " values, got " +
                      std::to_string(parts.empty() ? 0 : parts.size() - 1));
    }
    std::string id(parts[0]);
    if (!seen.insert(id).second) throw DataError(where + ": duplicate id '" + id + "'");
    auto row = m.values.row(static_cast<std::size_t>(r));
    for (long long c = 0; c < d; ++c) {
      double v = 0.0;
      try {
        v = parse_double(parts[static_cast<std::size_t>(c) + 1]);
      } catch (const DataError&) {
        throw DataError(where + ": invalid value '" +
                        std::string(parts[static_cast<std::size_t>(c) + 1]) + "'");
      }
      if (!std::isfinite(v)) throw DataError(where + ": non-finite value");
      row[static_cast<std::size_t>(c)] = v;
    }
    m.ids.push_back(std::move(id));
  }
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      throw DataError("EMB1: more rows than the declared " + std::to_string(n));
    }
  }
  return m;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  try {
    return read_embeddings(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& m) {
  m.validate();
  out << "EMB1 " << m.values.rows() << ' ' << m.values.cols() << ' '
      << (m.model_name.empty() ? "unnamed" : m.model_name) << '\n';
  for (std::size_t r = 0; r < m.values.rows(); ++r) {
    out << m.ids[r];
    for (double v : m.values.row(r)) out << ' ' << format_double(v);
    out << '\n';
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write embedding file " + path.string());
  write_embeddings(out, m);
}

std::vector<double> hash_embed(const textprep::TokenSequence& tokens, std::size_t d,
                               std::uint64_t seed) {
  if (d < 1) throw ConfigError("embedding dimension must be >= 1");
  std::vector<double> v(d, 0.0);
  for (const auto& t : tokens.tokens) {
    const std::uint64_t h = hash_combine(seed, t);
    const std::size_t idx = static_cast<std::size_t>(h % d);
    const double sign = (splitmix64(h) >> 63) ? -1.0 : 1.0;
    v[idx] += sign;
  }
  normalize_l2(v);
  return v;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("cosine similarity of vectors with different lengths");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (na * nb);
}

std::string_view to_string(Block b) {
  switch (b) {
    case Block::title_bag: return "title_bag";
    case Block::description_bag: return "description_bag";
    case Block::title_embedding: return "title_embedding";
    case Block::description_embedding: return "description_embedding";
  }
  return "?";
}

FeatureLayout::FeatureLayout(std::vector<std::string> title_tokens,
                             std::vector<std::string> description_tokens, std::size_t title_dim,
                             std::size_t description_dim)
    : title_tokens_(std::move(title_tokens)), description_tokens_(std::move(description_tokens)) {
  widths_ = {title_tokens_.size(), description_tokens_.size(), title_dim, description_dim};
  std::size_t off = 0;
  for (std::size_t b = 0; b < 4; ++b) {
    offsets_[b] = off;
    off += widths_[b];
  }
}

FeatureLayout FeatureLayout::from_widths(std::size_t title_bag, std::size_t description_bag,
                                         std::size_t title_dim, std::size_t description_dim) {
  std::vector<std::string> t, d;
  for (std::size_t i = 0; i < title_bag; ++i) t.push_back("t" + std::to_string(i));
  for (std::size_t i = 0; i < description_bag; ++i) d.push_back("d" + std::to_string(i));
  return {std::move(t), std::move(d), title_dim, description_dim};
}

Block FeatureLayout::block_of(std::size_t index) const {
  if (index >= total()) throw DataError("feature index out of layout range");
  for (std::size_t b = 4; b-- > 0;) {
    if (widths_[b] > 0 && index >= offsets_[b]) return static_cast<Block>(b);
  }
  return Block::title_bag;
}

bool FeatureLayout::is_bag(std::size_t index) const {
  const auto b = block_of(index);
  return b == Block::title_bag || b == Block::description_bag;
}

FeatureRef FeatureLayout::describe(std::size_t index) const {
  const Block b = block_of(index);
  const std::size_t off = index - offset(b);
  switch (b) {
    case Block::title_bag: return {b, off, title_tokens_[off]};
    case Block::description_bag: return {b, off, description_tokens_[off]};
    default: return {b, off, std::to_string(off)};
  }
}

FeatureVector fuse_features(const textprep::BagOfTokens& title_bag,
                            const textprep::BagOfTokens& description_bag,
                            std::span<const double> title_embedding,
                            std::span<const double> description_embedding,
                            std::shared_ptr<const FeatureLayout> layout) {
  if (!layout) throw ConfigError("fuse_features requires a layout");
  auto check_bag = [&](const textprep::BagOfTokens& bag, Block b) {
    if (!bag.counts.empty() && bag.counts.rbegin()->first >= layout->width(b)) {
      throw DataError("block " + std::string(to_string(b)) + ": token index exceeds width " +
                      std::to_string(layout->width(b)));
    }
  };
  auto check_emb = [&](std::span<const double> e, Block b) {
    if (e.size() != layout->width(b)) {
      throw DataError("block " + std::string(to_string(b)) + ": width " + std::to_string(e.size()) +
                      " != layout width " + std::to_string(layout->width(b)));
    }
  };
  check_bag(title_bag, Block::title_bag);
  check_bag(description_bag, Block::description_bag);
  check_emb(title_embedding, Block::title_embedding);
  check_emb(description_embedding, Block::description_embedding);

  FeatureVector v;
  v.values.assign(layout->total(), 0.0);
  for (auto& [i, c] : title_bag.counts) v.values[layout->offset(Block::title_bag) + i] = c;
  for (auto& [i, c] : description_bag.counts) {
    v.values[layout->offset(Block::description_bag) + i] = c;
  }
  std::copy(title_embedding.begin(), title_embedding.end(),
            v.values.begin() + static_cast<std::ptrdiff_t>(layout->offset(Block::title_embedding)));
  std::copy(description_embedding.begin(), description_embedding.end(),
            v.values.begin() +
                static_cast<std::ptrdiff_t>(layout->offset(Block::description_embedding)));
  v.layout = std::move(layout);
  return v;
}

FeatureMatrix FeatureMatrix::stack(std::span<const FeatureVector> vectors) {
  FeatureMatrix m;
  if (vectors.empty()) return m;
  m.layout = vectors.front().layout;
  if (!m.layout) throw ConfigError("feature vector without layout");
  m.rows = Matrix(vectors.size(), m.layout->total());
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    const auto& v = vectors[r];
    if (!v.layout || !(*v.layout == *m.layout)) {
      throw DataError("row " + std::to_string(r) + ": layout differs from the dataset layout");
    }
    std::copy(v.values.begin(), v.values.end(), m.rows.row(r).begin());
  }
  return m;
}

}  // namespace valfind::embedspace
