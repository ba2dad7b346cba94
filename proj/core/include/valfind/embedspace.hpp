#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "valfind/matrix.hpp"
#include "valfind/textprep.hpp"

namespace valfind::embedspace {

struct EmbeddingMatrix {
  std::vector<std::string> ids;
  Matrix values;  // one row per id
  std::string model_name;

  std::size_t dim() const { return values.cols(); }
  /// Row index of an id; throws DataError when absent.
  std::size_t row_of(const std::string& id) const;
  /// Checks row/id agreement, finiteness, d >= 1 and id uniqueness.
  void validate() const;
};

// EMB1: "EMB1 <n> <d> <model_name>" then n lines "<id> v1 ... vd".
EmbeddingMatrix read_embeddings(std::istream& in);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
void write_embeddings(std::ostream& out, const EmbeddingMatrix& m);
void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m);

/// Signed feature hashing of a token multiset into d buckets, L2-normalized.
std::vector<double> hash_embed(const textprep::TokenSequence& tokens, std::size_t d,
                               std::uint64_t seed);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Fused feature layout:
// [title-bag | description-bag | title-embedding | description-embedding].
enum class Block : std::uint8_t { title_bag, description_bag, title_embedding, description_embedding };
inline constexpr std::array<Block, 4> kAllBlocks = {Block::title_bag, Block::description_bag,
                                                    Block::title_embedding,
                                                    Block::description_embedding};
std::string_view to_string(Block b);

struct FeatureRef {
  Block block;
  std::size_t offset;  // within the block
  std::string name;    // token for bag blocks, component number for embeddings
};

class FeatureLayout {
 public:
  FeatureLayout() = default;
  FeatureLayout(std::vector<std::string> title_tokens, std::vector<std::string> description_tokens,
                std::size_t title_dim, std::size_t description_dim);
  /// Anonymous layout with only widths (tokens named "t<i>" / "d<i>").
  static FeatureLayout from_widths(std::size_t title_bag, std::size_t description_bag,
                                   std::size_t title_dim, std::size_t description_dim);

  std::size_t width(Block b) const { return widths_[static_cast<std::size_t>(b)]; }
  std::size_t offset(Block b) const { return offsets_[static_cast<std::size_t>(b)]; }
  std::size_t total() const { return offsets_[3] + widths_[3]; }
  bool is_bag(std::size_t index) const;
  Block block_of(std::size_t index) const;
  FeatureRef describe(std::size_t index) const;
  const std::vector<std::string>& title_tokens() const { return title_tokens_; }
  const std::vector<std::string>& description_tokens() const { return description_tokens_; }

  bool operator==(const FeatureLayout&) const = default;

 private:
  std::vector<std::string> title_tokens_;
  std::vector<std::string> description_tokens_;
  std::array<std::size_t, 4> widths_{};
  std::array<std::size_t, 4> offsets_{};
};

struct FeatureVector {
  std::vector<double> values;
  std::shared_ptr<const FeatureLayout> layout;
};

/// Concatenates the four blocks in layout order; throws DataError naming the
/// first block whose width disagrees with the layout.
FeatureVector fuse_features(const textprep::BagOfTokens& title_bag,
                            const textprep::BagOfTokens& description_bag,
                            std::span<const double> title_embedding,
                            std::span<const double> description_embedding,
                            std::shared_ptr<const FeatureLayout> layout);

// A dataset of fused rows sharing one layout.
struct FeatureMatrix {
  std::shared_ptr<const FeatureLayout> layout;
  Matrix rows;

  /// Stacks rows; throws DataError if any row's layout differs.
  static FeatureMatrix stack(std::span<const FeatureVector> vectors);
};

}  // namespace valfind::embedspace
