#include "valfind/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "valfind/csv.hpp"
#include "valfind/error.hpp"
#include "valfind/numfmt.hpp"
#include "valfind/rng.hpp"

namespace valfind::corpus {

namespace {

constexpr std::array<std::string_view, kDimensionCount> kDimensionNames = {
    "documentation",          "model_input", "model_environment", "model_output",
    "model_design",           "impact_assessment",
    "margin_of_conservatism", "model_use",   "model_implementation",
};

std::string valid_dimension_list() {
  std::string out;
  for (auto n : kDimensionNames) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

std::string_view to_string(Dimension d) { return kDimensionNames[static_cast<std::size_t>(d)]; }

Dimension parse_dimension(std::string_view s) {
  for (std::size_t i = 0; i < kDimensionNames.size(); ++i) {
    if (kDimensionNames[i] == s) return static_cast<Dimension>(i);
  }
  throw DataError("invalid dimension '" + std::string(s) + "'; expected one of: " +
                  valid_dimension_list());
}

std::vector<std::string> dimension_names() {
  return {kDimensionNames.begin(), kDimensionNames.end()};
}

std::string_view to_string(ModelCategory c) {
  switch (c) {
    case ModelCategory::PD: return "PD";
    case ModelCategory::LGD: return "LGD";
    case ModelCategory::EAD: return "EAD";
  }
  return "?";
}

ModelCategory parse_model_category(std::string_view s) {
  if (s == "PD") return ModelCategory::PD;
  if (s == "LGD") return ModelCategory::LGD;
  if (s == "EAD") return ModelCategory::EAD;
  throw DataError("invalid model_category '" + std::string(s) + "'; expected PD, LGD or EAD");
}

// --- SeverityScale -----------------------------------------------------------

SeverityScale::SeverityScale() : levels_{"low", "medium", "high"} {}

SeverityScale::SeverityScale(std::vector<std::string> levels) : levels_(std::move(levels)) {
  if (levels_.size() < 2) throw ConfigError("severity scale needs at least two levels");
  std::set<std::string> seen(levels_.begin(), levels_.end());
  if (seen.size() != levels_.size()) throw ConfigError("severity scale has duplicate levels");
  for (const auto& l : levels_) {
    if (trim(l).empty()) throw ConfigError("severity scale has an empty level");
  }
}

bool SeverityScale::contains(std::string_view level) const {
  return std::find(levels_.begin(), levels_.end(), level) != levels_.end();
}

std::size_t SeverityScale::rank(std::string_view level) const {
  auto it = std::find(levels_.begin(), levels_.end(), level);
  if (it == levels_.end()) throw DataError("severity '" + std::string(level) + "' not in scale");
  return static_cast<std::size_t>(it - levels_.begin());
}

// --- Date --------------------------------------------------------------------

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(int y, unsigned m) {
  static constexpr std::array<unsigned, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                     31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

}  // namespace

Date Date::parse(std::string_view iso) {
  iso = trim(iso);
  auto bad = [&] { return DataError("invalid ISO-8601 date '" + std::string(iso) + "'"); };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw bad();
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (iso[i] < '0' || iso[i] > '9') throw bad();
  }
  Date d;
  d.year = static_cast<int>(parse_int(iso.substr(0, 4)));
  d.month = static_cast<unsigned>(parse_int(iso.substr(5, 2)));
  d.day = static_cast<unsigned>(parse_int(iso.substr(8, 2)));
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) {
    throw bad();
  }
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
  return buf;
}

// Howard Hinnant's civil-calendar algorithms.
long long Date::days_since_epoch() const {
  const int y = year - (month <= 2 ? 1 : 0);
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned mp = month > 2 ? month - 3 : month + 9;
  const unsigned doy = (153 * mp + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

Date Date::from_days_since_epoch(long long z) {
  z += 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long y = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  Date d;
  d.day = doy - (153 * mp + 2) / 5 + 1;
  d.month = mp < 10 ? mp + 3 : mp - 9;
  d.year = static_cast<int>(y + (d.month <= 2 ? 1 : 0));
  return d;
}

// --- I/O -----------------------------------------------------------------------

FileFormat parse_file_format(std::string_view s) {
  if (s == "jsonl") return FileFormat::jsonl;
  if (s == "csv") return FileFormat::csv;
  throw ConfigError("unknown findings format '" + std::string(s) + "' (jsonl|csv)");
}

namespace {

void validate_one(const Finding& f, const SeverityScale& scale, const std::string& where) {
  if (trim(f.id).empty()) throw DataError(where + ": empty id");
  if (trim(f.title).empty()) throw DataError(where + ": finding '" + f.id + "' has empty title");
  if (trim(f.description).empty()) {
    throw DataError(where + ": finding '" + f.id + "' has empty description");
  }
  if (f.severity && !scale.contains(*f.severity)) {
    throw DataError(where + ": finding '" + f.id + "' has severity '" + *f.severity +
                    "' outside the configured scale");
  }
  if (f.finding_date && f.due_date && *f.due_date < *f.finding_date) {
    throw DataError(where + ": finding '" + f.id + "' is due before it was raised");
  }
}

const std::array<std::string_view, 10> kFields = {
    "id",           "title",    "description",   "dimension",   "severity",
    "model_category", "finding_date", "due_date", "person_to_act", "action_plan",
};

// Assigns one named field from its textual value; unknown names are ignored.
void set_field(Finding& f, std::string_view key, const std::string& value) {
  if (key == "id") f.id = value;
  else if (key == "title") f.title = value;
  else if (key == "description") f.description = value;
  else if (key == "dimension") f.dimension = parse_dimension(value);
  else if (key == "severity") f.severity = value;
  else if (key == "model_category") f.model_category = parse_model_category(value);
  else if (key == "finding_date") f.finding_date = Date::parse(value);
  else if (key == "due_date") f.due_date = Date::parse(value);
  else if (key == "person_to_act") f.person_to_act = value;
  else if (key == "action_plan") f.action_plan = value;
}

std::vector<std::pair<std::string_view, std::string>> present_fields(const Finding& f) {
  std::vector<std::pair<std::string_view, std::string>> out;
  out.emplace_back("id", f.id);
  out.emplace_back("title", f.title);
  out.emplace_back("description", f.description);
  if (f.dimension) out.emplace_back("dimension", std::string(to_string(*f.dimension)));
  if (f.severity) out.emplace_back("severity", *f.severity);
  if (f.model_category) out.emplace_back("model_category", std::string(to_string(*f.model_category)));
  if (f.finding_date) out.emplace_back("finding_date", f.finding_date->to_string());
  if (f.due_date) out.emplace_back("due_date", f.due_date->to_string());
  if (f.person_to_act) out.emplace_back("person_to_act", *f.person_to_act);
  if (f.action_plan) out.emplace_back("action_plan", *f.action_plan);
  return out;
}

void check_unique(std::unordered_set<std::string>& seen, const Finding& f, const std::string& where) {
  if (!seen.insert(f.id).second) throw DataError(where + ": duplicate id '" + f.id + "'");
}

std::vector<Finding> read_jsonl(std::istream& in, const SeverityScale& scale) {
  std::vector<Finding> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw DataError(where + ": expected a JSON object");
    Finding f;
    try {
      for (auto key : kFields) {
        auto it = obj.find(std::string(key));
        if (it == obj.end() || it->is_null()) continue;
        if (!it->is_string()) throw DataError("field '" + std::string(key) + "' must be a string");
        set_field(f, key, it->get<std::string>());
      }
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!obj.contains("id")) throw DataError(where + ": missing required field 'id'");
    validate_one(f, scale, where);
    check_unique(seen, f, where);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Finding> read_csv(std::istream& in, const SeverityScale& scale) {
  auto records = csv::parse(in);
  std::vector<Finding> out;
  if (records.empty()) return out;
  const auto& header = records.front().fields;
  for (auto required : {"id", "title", "description"}) {
    if (std::find(header.begin(), header.end(), required) == header.end()) {
      throw DataError("line 1: CSV header lacks required column '" + std::string(required) + "'");
    }
  }
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "line " + std::to_string(rec.line);
    if (rec.fields.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(rec.fields.size()));
    }
    Finding f;
    try {
      for (std::size_t c = 0; c < header.size(); ++c) {
        const auto& key = header[c];
        const auto& value = rec.fields[c];
        const bool required = key == "id" || key == "title" || key == "description";
        if (value.empty() && !required) continue;
        set_field(f, key, value);
      }
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    validate_one(f, scale, where);
    check_unique(seen, f, where);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

void validate(std::span<const Finding> findings, const SeverityScale& scale) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    const std::string where = "record " + std::to_string(i + 1);
    validate_one(findings[i], scale, where);
    check_unique(seen, findings[i], where);
  }
}

std::vector<Finding> read_findings(std::istream& in, FileFormat format, const SeverityScale& scale) {
  return format == FileFormat::jsonl ? read_jsonl(in, scale) : read_csv(in, scale);
}

std::vector<Finding> load_findings(const std::filesystem::path& path, FileFormat format,
                                   const SeverityScale& scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open findings file " + path.string());
  try {
    return read_findings(in, format, scale);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_findings(std::ostream& out, std::span<const Finding> findings, FileFormat format) {
  if (format == FileFormat::jsonl) {
    for (const auto& f : findings) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (auto& [k, v] : present_fields(f)) obj[std::string(k)] = v;
      out << obj.dump() << '\n';
    }
    return;
  }
  csv::write_row(out, csv::Row(kFields.begin(), kFields.end()));
  for (const auto& f : findings) {
    csv::Row row(kFields.size());
    for (auto& [k, v] : present_fields(f)) {
      auto pos = std::find(kFields.begin(), kFields.end(), k) - kFields.begin();
      row[static_cast<std::size_t>(pos)] = v;
    }
    csv::write_row(out, row);
  }
}

void save_findings(const std::filesystem::path& path, std::span<const Finding> findings,
                   FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write findings file " + path.string());
  write_findings(out, findings, format);
}

// --- Synthetic corpus ----------------------------------------------------------

namespace {

using Pool = std::vector<std::string_view>;

// Dimension vocabularies seeded with the reference token-ranking words.
const std::array<Pool, kDimensionCount>& pools() {
  static const std::array<Pool, kDimensionCount> kPools = {{
      {"document", "documentation", "description", "code", "order", "update", "chapter",
       "section", "appendix", "version", "describe", "unclear", "manual", "template"},
      {"customer", "portfolio", "sample", "quality", "availability", "adequacy", "validity",
       "record", "field", "cleansing", "outlier", "exclusion", "extraction", "source"},
      {"scope", "representativeness", "within", "credit", "segment", "population",
       "alignment", "external", "environment", "coverage", "applicability", "economic",
       "product", "jurisdiction"},
      {"threshold", "rating", "grade", "test", "month", "observe", "calibration", "bias",
       "discriminatory", "power", "backtest", "gini", "auroc", "drift"},
      {"MD", "downturn", "LGD", "risk", "specification", "methodology", "regression",
       "estimation", "segmentation", "statistical", "assumption", "parameter", "weighting",
       "functional"},
      {"impact", "calculate", "different", "definition", "capital", "RWA", "quantify",
       "effect", "expected", "loss", "financial", "amount", "increase", "provision"},
      {"MoC", "deficiency", "apply", "driver", "conservatism", "margin", "uncertainty",
       "addon", "category", "triage", "buffer", "overlay", "adjustment", "remedy"},
      {"decision", "new", "need", "usage", "purpose", "application", "business", "pricing",
       "limit", "approval", "strategy", "origination", "collection", "embedded"},
      {"ISD", "implementation", "implement", "include", "plan", "system", "production",
       "Ruritania", "deployment", "software", "interface", "reconciliation", "engine",
       "mapping"},
  }};
  return kPools;
}

const Pool kFiller = {"model",    "data",     "default",  "use",      "perform",  "development",
                      "analysis", "level",    "validation", "finding", "team",    "bank",
                      "identified", "result", "current",  "period",   "provide",  "review",
                      "requirement", "information", "regard", "case", "annual",  "unit"};

const Pool kStopFiller = {"the", "of", "is", "in", "for", "and", "to", "a", "not", "was", "are"};

const std::array<Pool, 3> kSeverityWords = {{
    {"minor", "cosmetic", "editorial", "small"},
    {"moderate", "relevant", "partial", "notable"},
    {"material", "critical", "severe", "significant"},
}};

std::string_view pick(Rng& rng, const Pool& pool) {
  return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string content_word(Rng& rng, std::size_t dim, const SyntheticOptions& opt) {
  if (opt.separable) return std::string(pick(rng, pools()[dim]));
  const double u = rng.uniform();
  if (u < opt.signal) return std::string(pick(rng, pools()[dim]));
  if (u < opt.signal + opt.confusion) {
    std::size_t other = static_cast<std::size_t>(rng.below(kDimensionCount - 1));
    if (other >= dim) ++other;
    return std::string(pick(rng, pools()[other]));
  }
  return std::string(pick(rng, kFiller));
}

std::string make_text(Rng& rng, std::size_t dim, std::size_t words, const SyntheticOptions& opt,
                      std::string_view severity_word, bool sentence) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < words; ++i) {
    if (!opt.separable && rng.uniform() < 0.25) out.emplace_back(pick(rng, kStopFiller));
    out.push_back(content_word(rng, dim, opt));
  }
  if (!severity_word.empty()) {
    const auto pos = static_cast<std::ptrdiff_t>(rng.below(out.size() + 1));
    out.insert(out.begin() + pos, std::string(severity_word));
  }
  std::string text;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) text += (sentence && rng.uniform() < 0.08) ? ", " : " ";
    text += out[i];
  }
  text = capitalize(std::move(text));
  if (sentence) text += '.';
  return text;
}

}  // namespace

std::span<const std::string_view> keyword_pool(Dimension d) {
  return pools()[static_cast<std::size_t>(d)];
}

LabelProfile reference_profile() {
  // Supports summed over the train/valid/test reports (n = 657).
  const std::array<std::pair<Dimension, double>, kDimensionCount> counts = {{
      {Dimension::documentation, 52},
      {Dimension::model_input, 181},
      {Dimension::model_environment, 45},
      {Dimension::model_output, 103},
      {Dimension::model_design, 139},
      {Dimension::impact_assessment, 21},
      {Dimension::margin_of_conservatism, 69},
      {Dimension::model_use, 18},
      {Dimension::model_implementation, 29},
  }};
  LabelProfile p;
  for (auto [d, c] : counts) p.emplace_back(d, c / 657.0);
  return p;
}

LabelProfile uniform_profile() {
  LabelProfile p;
  for (auto d : kAllDimensions) p.emplace_back(d, 1.0 / kDimensionCount);
  return p;
}

std::vector<std::size_t> largest_remainder(std::span<const double> fractions, std::size_t n) {
  std::vector<std::size_t> counts(fractions.size());
  std::vector<double> rema(fractions.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double q = fractions[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(q));
    rema[i] = q - std::floor(q);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(fractions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rema[a] > rema[b]; });
  for (std::size_t i = 0; assigned < n && i < order.size(); ++i, ++assigned) ++counts[order[i]];
  // Only reachable when the fractions sum short of 1 by more than rounding.
  for (std::size_t i = 0; assigned < n; i = (i + 1) % counts.size(), ++assigned) ++counts[i];
  return counts;
}

std::vector<Finding> generate_synthetic_corpus(const SyntheticOptions& opt) {
  if (opt.n < 1) throw ConfigError("synthetic corpus size must be >= 1");
  if (opt.profile.empty()) throw ConfigError("synthetic label profile is empty");
  double total = 0.0;
  std::set<Dimension> seen;
  for (auto [d, p] : opt.profile) {
    if (p < 0.0) throw ConfigError("negative fraction in label profile");
    if (!seen.insert(d).second) throw ConfigError("label profile repeats a dimension");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("label profile fractions must sum to 1");
  if (opt.signal < 0 || opt.confusion < 0 || opt.signal + opt.confusion > 1) {
    throw ConfigError("signal + confusion must lie in [0, 1]");
  }

  std::vector<double> fractions;
  for (auto [d, p] : opt.profile) fractions.push_back(p);
  const auto counts = largest_remainder(fractions, opt.n);

  std::vector<Dimension> labels;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    labels.insert(labels.end(), counts[i], opt.profile[i].first);
  }
  Rng rng(opt.seed);
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[static_cast<std::size_t>(rng.below(i))]);
  }

  const auto& levels = opt.severity_scale.levels();
  std::vector<double> sev_weights(levels.size(), 1.0);
  if (levels.size() == 3) sev_weights = {0.35, 0.45, 0.2};
  const double sev_total = std::accumulate(sev_weights.begin(), sev_weights.end(), 0.0);

  const int width = std::max<int>(4, static_cast<int>(std::to_string(opt.n).size()));
  const Date start{2019, 1, 1};
  const long long span_days = Date{2022, 12, 31}.days_since_epoch() - start.days_since_epoch() + 1;

  std::vector<Finding> out;
  out.reserve(opt.n);
  for (std::size_t i = 0; i < opt.n; ++i) {
    const std::size_t dim = static_cast<std::size_t>(labels[i]);
    Finding f;
    std::string num = std::to_string(i + 1);
    f.id = "VF-" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;

    double u = rng.uniform() * sev_total;
    std::size_t sev = 0;
    while (sev + 1 < levels.size() && u >= sev_weights[sev]) u -= sev_weights[sev++];
    f.severity = levels[sev];
    // Severity cue words exist for the default three-level scale only.
    std::string_view sev_word;
    if (levels.size() == 3 && rng.uniform() < 0.6) sev_word = pick(rng, kSeverityWords[sev]);

    f.dimension = labels[i];
    f.title = make_text(rng, dim, 3 + rng.below(4), opt, {}, false);
    f.description = make_text(rng, dim, 14 + rng.below(15), opt, sev_word, true);

    const double c = rng.uniform();
    f.model_category = c < 0.45 ? ModelCategory::PD : c < 0.8 ? ModelCategory::LGD : ModelCategory::EAD;
    const long long raised = start.days_since_epoch() + static_cast<long long>(rng.below(span_days));
    f.finding_date = Date::from_days_since_epoch(raised);
    f.due_date = Date::from_days_since_epoch(raised + 30 + static_cast<long long>(rng.below(336)));
    f.person_to_act = "owner-" + std::to_string(1 + rng.below(24));
    f.action_plan = "Remediate: " + make_text(rng, dim, 4, opt, {}, true);
    out.push_back(std::move(f));
  }
  return out;
}

// --- Splitting -------------------------------------------------------------------

void SplitRatios::validate() const {
  for (double r : {train, valid, test}) {
    if (!(r > 0.0 && r < 1.0)) throw ConfigError("split ratios must lie in (0, 1)");
  }
  if (std::abs(train + valid + test - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
}

SplitRatios SplitRatios::parse(std::string_view s) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = s.substr(start, comma == std::string_view::npos ? s.npos : comma - start);
    try {
      parts.push_back(parse_double(piece));
    } catch (const DataError&) {
      throw ConfigError("invalid split ratios '" + std::string(s) + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (parts.size() != 3) throw ConfigError("split ratios need three comma-separated values");
  SplitRatios r{parts[0], parts[1], parts[2]};
  r.validate();
  return r;
}

StratifyOn parse_stratify(std::string_view s) {
  if (s == "dimension") return StratifyOn::dimension;
  if (s == "severity") return StratifyOn::severity;
  throw ConfigError("stratify must be 'dimension' or 'severity'");
}

namespace {

// Tops up per-stratum floor counts so every subset hits its global target
// while each (stratum, subset) cell gets at most one extra member. Cells are
// filled by descending fractional remainder; unplaceable units are rerouted
// through augmenting paths, with a plain fallback if none exists.
void distribute_leftovers(std::vector<std::array<std::size_t, 3>>& alloc,
                          const std::vector<std::array<double, 3>>& remainder,
                          std::vector<std::size_t> leftover, std::array<std::size_t, 3> deficit) {
  const std::size_t strata = alloc.size();
  std::vector<std::array<bool, 3>> extra(strata, {false, false, false});

  struct Cell {
    double rem;
    std::size_t s, j;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < strata; ++s) {
    for (std::size_t j = 0; j < 3; ++j) cells.push_back({remainder[s][j], s, j});
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) { return a.rem > b.rem; });
  for (const auto& c : cells) {
    if (leftover[c.s] > 0 && deficit[c.j] > 0) {
      extra[c.s][c.j] = true;
      --leftover[c.s];
      --deficit[c.j];
    }
  }

  // Augment: move a unit from stratum s into subset j, possibly shifting
  // another stratum's extra from j to a subset that still has a deficit.
  std::function<bool(std::size_t, std::vector<bool>&)> place = [&](std::size_t s,
                                                                   std::vector<bool>& visited) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (!extra[s][j] && deficit[j] > 0) {
        extra[s][j] = true;
        --deficit[j];
        return true;
      }
    }
    for (std::size_t j = 0; j < 3; ++j) {
      if (extra[s][j]) continue;
      for (std::size_t t = 0; t < strata; ++t) {
        if (t == s || visited[t] || !extra[t][j]) continue;
        visited[t] = true;
        extra[t][j] = false;
        ++deficit[j];
        extra[s][j] = true;
        --deficit[j];
        if (place(t, visited)) return true;
        extra[s][j] = false;
        extra[t][j] = true;
      }
    }
    return false;
  };
  for (std::size_t s = 0; s < strata; ++s) {
    while (leftover[s] > 0) {
      std::vector<bool> visited(strata, false);
      visited[s] = true;
      if (!place(s, visited)) {
        for (std::size_t j = 0; j < 3; ++j) {
          if (deficit[j] > 0) {
            ++alloc[s][j];
            --deficit[j];
            break;
          }
        }
      }
      --leftover[s];
    }
  }
  for (std::size_t s = 0; s < strata; ++s) {
    for (std::size_t j = 0; j < 3; ++j) alloc[s][j] += extra[s][j] ? 1 : 0;
  }
}

}  // namespace

Split stratified_split(std::span<const Finding> findings, const SplitRatios& ratios,
                       StratifyOn stratify_on, std::uint64_t seed) {
  ratios.validate();
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    const auto& f = findings[i];
    std::string key;
    if (stratify_on == StratifyOn::dimension) {
      if (!f.dimension) throw DataError("finding '" + f.id + "' has no dimension to stratify on");
      key = std::string(to_string(*f.dimension));
    } else {
      if (!f.severity) throw DataError("finding '" + f.id + "' has no severity to stratify on");
      key = *f.severity;
    }
    strata[key].push_back(i);
  }

  Split out;
  std::vector<int> subset(findings.size(), 0);
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> members;
  std::size_t eligible = 0;
  for (auto& [name, idx] : strata) {
    if (idx.size() < 3) {
      out.warnings.push_back("stratum '" + name + "' has " + std::to_string(idx.size()) +
                             " member(s); assigned to train");
      continue;
    }
    // Shuffle order keyed on (seed, stratum, id) so input order is irrelevant.
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto ka = hash_combine(hash_combine(seed, name), findings[a].id);
      const auto kb = hash_combine(hash_combine(seed, name), findings[b].id);
      return ka != kb ? ka < kb : findings[a].id < findings[b].id;
    });
    eligible += idx.size();
    names.push_back(name);
    members.push_back(idx);
  }

  const std::array<double, 3> r = {ratios.train, ratios.valid, ratios.test};
  const auto targets = largest_remainder(r, eligible);
  std::vector<std::array<std::size_t, 3>> alloc(members.size());
  std::vector<std::array<double, 3>> rema(members.size());
  std::vector<std::size_t> leftover(members.size());
  std::array<std::size_t, 3> deficit = {targets[0], targets[1], targets[2]};
  for (std::size_t s = 0; s < members.size(); ++s) {
    std::size_t used = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double q = r[j] * static_cast<double>(members[s].size());
      alloc[s][j] = static_cast<std::size_t>(std::floor(q));
      rema[s][j] = q - std::floor(q);
      used += alloc[s][j];
      deficit[j] -= alloc[s][j];
    }
    leftover[s] = members[s].size() - used;
  }
  distribute_leftovers(alloc, rema, leftover, deficit);

  for (std::size_t s = 0; s < members.size(); ++s) {
    std::size_t pos = 0;
    for (int j = 0; j < 3; ++j) {
      for (std::size_t c = 0; c < alloc[s][static_cast<std::size_t>(j)]; ++c) {
        subset[members[s][pos++]] = j;
      }
    }
  }
  for (std::size_t i = 0; i < findings.size(); ++i) {
    auto& dst = subset[i] == 0 ? out.train : subset[i] == 1 ? out.valid : out.test;
    dst.push_back(findings[i]);
  }
  return out;
}

}  // namespace valfind::corpus
