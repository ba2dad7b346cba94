#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace valfind::corpus {

// The nine validation dimensions a finding can be filed under.
enum class Dimension : std::uint8_t {
  documentation,
  model_input,
  model_environment,
  model_output,
  model_design,
  impact_assessment,
  margin_of_conservatism,
  model_use,
  model_implementation,
};
inline constexpr std::size_t kDimensionCount = 9;

inline constexpr std::array<Dimension, kDimensionCount> kAllDimensions = {
    Dimension::documentation,          Dimension::model_input,
    Dimension::model_environment,      Dimension::model_output,
    Dimension::model_design,           Dimension::impact_assessment,
    Dimension::margin_of_conservatism, Dimension::model_use,
    Dimension::model_implementation,
};

std::string_view to_string(Dimension d);
/// Throws DataError listing the nine valid names.
Dimension parse_dimension(std::string_view s);
std::vector<std::string> dimension_names();

enum class ModelCategory : std::uint8_t { PD, LGD, EAD };
std::string_view to_string(ModelCategory c);
ModelCategory parse_model_category(std::string_view s);

// Ordered set of severity level names, lowest first.
class SeverityScale {
 public:
  SeverityScale();  // low < medium < high
  explicit SeverityScale(std::vector<std::string> levels);

  const std::vector<std::string>& levels() const { return levels_; }
  bool contains(std::string_view level) const;
  /// Rank of a level within the scale; throws DataError when absent.
  std::size_t rank(std::string_view level) const;

 private:
  std::vector<std::string> levels_;
};

struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  auto operator<=>(const Date&) const = default;

  /// Strict YYYY-MM-DD; throws DataError.
  static Date parse(std::string_view iso);
  std::string to_string() const;
  /// Days since 1970-01-01 (proleptic Gregorian).
  long long days_since_epoch() const;
  static Date from_days_since_epoch(long long days);
};

struct Finding {
  std::string id;
  std::string title;
  std::string description;
  std::optional<Dimension> dimension;
  std::optional<std::string> severity;
  std::optional<ModelCategory> model_category;
  std::optional<Date> finding_date;
  std::optional<Date> due_date;
  std::optional<std::string> person_to_act;
  std::optional<std::string> action_plan;

  bool operator==(const Finding&) const = default;
};

enum class FileFormat { jsonl, csv };
FileFormat parse_file_format(std::string_view s);

/// Checks per-record and corpus-level invariants (unique ids, nonempty text,
/// due date not before finding date, severity within the scale).
void validate(std::span<const Finding> findings, const SeverityScale& scale = {});

std::vector<Finding> read_findings(std::istream& in, FileFormat format,
                                   const SeverityScale& scale = {});
std::vector<Finding> load_findings(const std::filesystem::path& path, FileFormat format,
                                   const SeverityScale& scale = {});
void write_findings(std::ostream& out, std::span<const Finding> findings, FileFormat format);
void save_findings(const std::filesystem::path& path, std::span<const Finding> findings,
                   FileFormat format);

// ---------------------------------------------------------------------------
// Synthetic corpus

/// Fractions per dimension; must sum to 1 within 1e-9.
using LabelProfile = std::vector<std::pair<Dimension, double>>;

/// Dimension shares of the 657-finding reference corpus (train+valid+test
/// supports of the published classification reports).
LabelProfile reference_profile();
LabelProfile uniform_profile();

struct SyntheticOptions {
  std::size_t n = 657;
  std::uint64_t seed = 1;
  LabelProfile profile = reference_profile();
  /// Probability that a content word is drawn from the finding's own
  /// dimension pool; the rest comes from other pools and shared filler.
  double signal = 0.30;
  /// Probability that a content word is borrowed from another dimension.
  double confusion = 0.25;
  /// Emit only own-pool keywords (fully separable labels).
  bool separable = false;
  SeverityScale severity_scale{};
};

/// Exact per-label counts by largest-remainder rounding; ties go to the
/// earlier entry.
std::vector<std::size_t> largest_remainder(std::span<const double> fractions, std::size_t n);

std::vector<Finding> generate_synthetic_corpus(const SyntheticOptions& options);

/// Keyword pool used by the generator for one dimension.
std::span<const std::string_view> keyword_pool(Dimension d);

// ---------------------------------------------------------------------------
// Stratified splitting

struct SplitRatios {
  double train = 0.6;
  double valid = 0.2;
  double test = 0.2;

  void validate() const;
  static SplitRatios parse(std::string_view csv_triplet);
};

enum class StratifyOn { dimension, severity };
StratifyOn parse_stratify(std::string_view s);

struct Split {
  std::vector<Finding> train;
  std::vector<Finding> valid;
  std::vector<Finding> test;
  std::vector<std::string> warnings;
};

/// Stratum-wise split, order-independent and deterministic per seed.
Split stratified_split(std::span<const Finding> findings, const SplitRatios& ratios,
                       StratifyOn stratify_on, std::uint64_t seed);

}  // namespace valfind::corpus
