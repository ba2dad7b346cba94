#include "valfind/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "valfind/clusterlab.hpp"
#include "valfind/dimassign.hpp"
#include "valfind/error.hpp"
#include "valfind/numfmt.hpp"

namespace valfind::config {

namespace {

std::string kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::boolean: return "boolean";
    case Value::Kind::integer: return "integer";
    case Value::Kind::real: return "float";
    case Value::Kind::string: return "string";
    case Value::Kind::array: return "array";
  }
  return "?";
}

[[noreturn]] void wrong_kind(const std::string& key, const Value& v, const char* want) {
  throw ConfigError("'" + key + "' must be " + want + ", got " + kind_name(v.kind));
}

}  // namespace

double Value::as_real(const std::string& key) const {
  if (kind == Kind::real) return d;
  if (kind == Kind::integer) return static_cast<double>(i);
  wrong_kind(key, *this, "a number");
}

long long Value::as_int(const std::string& key) const {
  if (kind != Kind::integer) wrong_kind(key, *this, "an integer");
  return i;
}

bool Value::as_bool(const std::string& key) const {
  if (kind != Kind::boolean) wrong_kind(key, *this, "a boolean");
  return b;
}

const std::string& Value::as_string(const std::string& key) const {
  if (kind != Kind::string) wrong_kind(key, *this, "a string");
  return s;
}

std::vector<double> Value::as_real_list(const std::string& key) const {
  if (kind != Kind::array) return {as_real(key)};
  std::vector<double> out;
  for (const auto& v : items) out.push_back(v.as_real(key));
  return out;
}

std::vector<long long> Value::as_int_list(const std::string& key) const {
  if (kind != Kind::array) return {as_int(key)};
  std::vector<long long> out;
  for (const auto& v : items) out.push_back(v.as_int(key));
  return out;
}

std::vector<std::string> Value::as_string_list(const std::string& key) const {
  if (kind != Kind::array) return {as_string(key)};
  std::vector<std::string> out;
  for (const auto& v : items) out.push_back(v.as_string(key));
  return out;
}

// --- parser --------------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::string where) : text_(text), where_(std::move(where)) {}

  Value value() {
    skip_space();
    if (eof()) fail("missing value");
    const char c = text_[pos_];
    if (c == '"') return string_value();
    if (c == '\'') return literal_value();
    if (c == '[') return array_value();
    return scalar_value();
  }

  void skip_space(bool newlines = false) {
    while (!eof()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || (newlines && (c == '\n' || c == '\r'))) {
        ++pos_;
      } else if (newlines && c == '#') {
        while (!eof() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool eof() const { return pos_ >= text_.size(); }
  std::size_t pos() const { return pos_; }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

 private:
  Value string_value() {
    ++pos_;
    Value v;
    v.kind = Value::Kind::string;
    while (true) {
      if (eof() || text_[pos_] == '\n') fail("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        v.s.push_back(c);
        continue;
      }
      if (eof()) fail("unterminated escape");
      switch (text_[pos_++]) {
        case '"': v.s.push_back('"'); break;
        case '\\': v.s.push_back('\\'); break;
        case 'n': v.s.push_back('\n'); break;
        case 't': v.s.push_back('\t'); break;
        case 'r': v.s.push_back('\r'); break;
        default: fail("unsupported escape sequence");
      }
    }
    return v;
  }

  Value literal_value() {
    ++pos_;
    const auto end = text_.find('\'', pos_);
    const auto nl = text_.find('\n', pos_);
    if (end == std::string_view::npos || (nl != std::string_view::npos && nl < end)) {
      fail("unterminated string");
    }
    Value v;
    v.kind = Value::Kind::string;
    v.s = std::string(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return v;
  }

  Value array_value() {
    ++pos_;
    Value v;
    v.kind = Value::Kind::array;
    while (true) {
      skip_space(true);
      if (eof()) fail("unterminated array");
      if (text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      v.items.push_back(value());
      if (v.items.back().kind == Value::Kind::array) fail("nested arrays are not supported");
      skip_space(true);
      if (eof()) fail("unterminated array");
      if (text_[pos_] == ',') {
        ++pos_;
      } else if (text_[pos_] != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  Value scalar_value() {
    const auto start = pos_;
    while (!eof()) {
      const char c = text_[pos_];
      if (c == ',' || c == ']' || c == '#' || c == ' ' || c == '\t' || c == '\n' || c == '\r') break;
      ++pos_;
    }
    std::string raw(text_.substr(start, pos_ - start));
    Value v;
    if (raw == "true" || raw == "false") {
      v.kind = Value::Kind::boolean;
      v.b = raw == "true";
      return v;
    }
    std::erase(raw, '_');
    if (raw.empty()) fail("missing value");
    const bool integral = raw.find_first_of(".eE") == std::string::npos &&
                          raw.find_first_not_of("+-0123456789") == std::string::npos;
    try {
      if (integral) {
        v.kind = Value::Kind::integer;
        v.i = parse_int(raw[0] == '+' ? std::string_view(raw).substr(1) : std::string_view(raw));
      } else {
        v.kind = Value::Kind::real;
        v.d = parse_double(raw[0] == '+' ? std::string_view(raw).substr(1) : std::string_view(raw));
      }
    } catch (const DataError&) {
      fail("invalid value '" + raw + "'");
    }
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::string where_;
};

bool bare_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-' || c == '.';
}

std::string checked_key(std::string_view raw, const std::string& where) {
  const auto b = raw.find_first_not_of(" \t");
  const auto e = raw.find_last_not_of(" \t");
  if (b == std::string_view::npos) throw ConfigError(where + ": empty key");
  std::string key(raw.substr(b, e - b + 1));
  for (char c : key) {
    if (!bare_key_char(c)) throw ConfigError(where + ": invalid key '" + key + "'");
  }
  if (key.front() == '.' || key.back() == '.' || key.find("..") != std::string::npos) {
    throw ConfigError(where + ": invalid key '" + key + "'");
  }
  return key;
}

}  // namespace

Document Document::parse(std::string_view text, const std::string& source) {
  Document doc;
  std::string table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    const std::string where = source + ":" + std::to_string(line_no);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') {
      pos = nl + 1;
      continue;
    }
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string_view::npos) throw ConfigError(where + ": unterminated table header");
      const auto rest = line.substr(close + 1);
      const auto tail = rest.find_first_not_of(" \t\r");
      if (tail != std::string_view::npos && rest[tail] != '#') {
        throw ConfigError(where + ": trailing characters after table header");
      }
      table = checked_key(line.substr(first + 1, close - first - 1), where);
      pos = nl + 1;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const auto key = (table.empty() ? "" : table + ".") + checked_key(line.substr(0, eq), where);
    // The value may continue over several lines (multi-line arrays).
    Parser p(text.substr(pos + eq + 1), where);
    Value v = p.value();
    p.skip_space();
    auto consumed = pos + eq + 1 + p.pos();
    while (consumed < text.size() && text[consumed] == '\r') ++consumed;
    if (consumed < text.size() && text[consumed] == '#') {
      consumed = text.find('\n', consumed);
      if (consumed == std::string_view::npos) consumed = text.size();
    }
    if (consumed < text.size() && text[consumed] != '\n') {
      throw ConfigError(where + ": trailing characters after value of '" + key + "'");
    }
    for (auto c = pos + eq + 1; c < consumed; ++c) line_no += text[c] == '\n' ? 1 : 0;
    if (!doc.entries_.emplace(key, std::move(v)).second) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
    pos = consumed + 1;
  }
  return doc;
}

Document Document::parse(std::istream& in, const std::string& source) {
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(std::string_view(ss.str()), source);
}

Document Document::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

const Value* Document::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string_view to_string(FeatureSelect f) {
  switch (f) {
    case FeatureSelect::title: return "title";
    case FeatureSelect::description: return "description";
    case FeatureSelect::fused: return "fused";
  }
  return "?";
}

FeatureSelect parse_feature_select(std::string_view s) {
  if (s == "title") return FeatureSelect::title;
  if (s == "description") return FeatureSelect::description;
  if (s == "fused") return FeatureSelect::fused;
  throw ConfigError("unknown feature selection '" + std::string(s) + "' (title|description|fused)");
}

// --- experiment config -----------------------------------------------------------

namespace {

std::size_t to_size(const std::string& key, long long v) {
  if (v < 0) throw ConfigError("'" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

int to_int(const std::string& key, long long v) {
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError("'" + key + "' is out of range");
  return static_cast<int>(v);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const Value&)>;

template <class T>
Setter str(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const Value& v) { c.*field = v.as_string(k); };
}
Setter size(std::size_t ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const Value& v) {
    c.*field = to_size(k, v.as_int(k));
  };
}
Setter seed(std::uint64_t ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const Value& v) {
    c.*field = static_cast<std::uint64_t>(to_size(k, v.as_int(k)));
  };
}
Setter real(double ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const Value& v) { c.*field = v.as_real(k); };
}

const std::map<std::string, Setter>& setters() {
  using C = ExperimentConfig;
  static const std::map<std::string, Setter> table = {
      {"paths.findings", str(&C::findings)},
      {"paths.findings_format", str(&C::findings_format)},
      {"paths.title_embeddings", str(&C::title_embeddings)},
      {"paths.description_embeddings", str(&C::description_embeddings)},
      {"paths.output", str(&C::output)},
      {"paths.run_id", str(&C::run_id)},
      {"paths.stopwords", str(&C::stopwords)},
      {"paths.lemmas", str(&C::lemmas)},
      {"corpus.n", size(&C::synth_n)},
      {"corpus.seed", seed(&C::synth_seed)},
      {"corpus.profile", str(&C::synth_profile)},
      {"corpus.signal", real(&C::synth_signal)},
      {"corpus.confusion", real(&C::synth_confusion)},
      {"corpus.severity_levels",
       [](C& c, const std::string& k, const Value& v) { c.severity_levels = v.as_string_list(k); }},
      {"split.ratios",
       [](C& c, const std::string& k, const Value& v) {
         const auto r = v.as_real_list(k);
         if (r.size() != 3) throw ConfigError("'" + k + "' needs three fractions");
         c.split_ratios = {r[0], r[1], r[2]};
       }},
      {"split.seed", seed(&C::split_seed)},
      {"split.stratify", str(&C::stratify)},
      {"features.select",
       [](C& c, const std::string& k, const Value& v) {
         c.features = parse_feature_select(v.as_string(k));
       }},
      {"features.target", str(&C::target)},
      {"features.min_df", size(&C::min_df)},
      {"embed.dim", size(&C::embed_dim)},
      {"embed.seed", seed(&C::embed_seed)},
      {"cluster.algorithm", str(&C::cluster_algorithm)},
      {"cluster.k", size(&C::cluster_k)},
      {"cluster.algorithms", str(&C::sweep_algorithms)},
      {"cluster.k_min", size(&C::k_min)},
      {"cluster.k_max", size(&C::k_max)},
      {"cluster.seed", seed(&C::cluster_seed)},
      {"cluster.n_init", size(&C::kmeans_n_init)},
      {"cluster.batch_size", size(&C::minibatch_batch_size)},
      {"cluster.birch_threshold", real(&C::birch_threshold)},
      {"cluster.birch_branching", size(&C::birch_branching)},
      {"cluster.threads", size(&C::threads)},
      {"assign.methods", str(&C::assign_methods)},
      {"assign.algorithm", str(&C::assign_algorithm)},
      {"assign.seed", seed(&C::assign_seed)},
      {"train.model", str(&C::model)},
      {"boost.rounds",
       [](C& c, const std::string& k, const Value& v) { c.boost.rounds = to_int(k, v.as_int(k)); }},
      {"boost.eta", [](C& c, const std::string& k, const Value& v) { c.boost.eta = v.as_real(k); }},
      {"boost.lambda",
       [](C& c, const std::string& k, const Value& v) { c.boost.lambda = v.as_real(k); }},
      {"boost.gamma", [](C& c, const std::string& k, const Value& v) { c.boost.gamma = v.as_real(k); }},
      {"boost.max_depth",
       [](C& c, const std::string& k, const Value& v) { c.boost.max_depth = to_int(k, v.as_int(k)); }},
      {"boost.min_child_hessian",
       [](C& c, const std::string& k, const Value& v) { c.boost.min_child_hessian = v.as_real(k); }},
      {"boost.seed",
       [](C& c, const std::string& k, const Value& v) {
         c.boost.seed = static_cast<std::uint64_t>(to_size(k, v.as_int(k)));
       }},
      {"boost.verify_objective",
       [](C& c, const std::string& k, const Value& v) { c.boost.verify_objective = v.as_bool(k); }},
      {"logreg.l2", [](C& c, const std::string& k, const Value& v) { c.logreg.l2 = v.as_real(k); }},
      {"logreg.epochs",
       [](C& c, const std::string& k, const Value& v) { c.logreg.epochs = to_int(k, v.as_int(k)); }},
      {"logreg.step", [](C& c, const std::string& k, const Value& v) { c.logreg.step = v.as_real(k); }},
      {"tune.grid", str(&C::grid_file)},
      {"tune.eta", [](C& c, const std::string& k, const Value& v) { c.grid.eta = v.as_real_list(k); }},
      {"tune.lambda",
       [](C& c, const std::string& k, const Value& v) { c.grid.lambda = v.as_real_list(k); }},
      {"tune.max_depth",
       [](C& c, const std::string& k, const Value& v) {
         c.grid.max_depth.clear();
         for (auto x : v.as_int_list(k)) c.grid.max_depth.push_back(to_int(k, x));
       }},
      {"tune.rounds",
       [](C& c, const std::string& k, const Value& v) {
         c.grid.rounds.clear();
         for (auto x : v.as_int_list(k)) c.grid.rounds.push_back(to_int(k, x));
       }},
      {"attribute.top_k", size(&C::top_k)},
  };
  return table;
}

}  // namespace

void ExperimentConfig::apply(const Document& doc) {
  const auto& table = setters();
  for (const auto& [key, value] : doc.entries()) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(*this, key, value);
  }
}

void ExperimentConfig::validate() const {
  if (output.empty()) throw ConfigError("output directory must be set");
  (void)corpus::parse_file_format(findings_format);
  if (synth_n == 0) throw ConfigError("corpus.n must be positive");
  if (synth_profile != "reference" && synth_profile != "uniform" && synth_profile != "separable") {
    throw ConfigError("corpus.profile must be reference, uniform or separable");
  }
  if (!(synth_signal >= 0.0 && synth_signal <= 1.0) ||
      !(synth_confusion >= 0.0 && synth_confusion <= 1.0) || synth_signal + synth_confusion > 1.0) {
    throw ConfigError("corpus.signal and corpus.confusion must be in [0,1] with sum <= 1");
  }
  try {
    corpus::SeverityScale scale(severity_levels);
  } catch (const Error& e) {
    throw ConfigError(std::string("corpus.severity_levels: ") + e.what());
  }
  split_ratios.validate();
  (void)corpus::parse_stratify(stratify);
  if (target != "dimension" && target != "severity") {
    throw ConfigError("features.target must be dimension or severity");
  }
  if (min_df < 1) throw ConfigError("features.min_df must be at least 1");
  if (embed_dim < 1) throw ConfigError("embed.dim must be at least 1");
  (void)clusterlab::parse_algorithm(cluster_algorithm);
  (void)clusterlab::parse_algorithm_list(sweep_algorithms);
  (void)clusterlab::parse_algorithm(assign_algorithm);
  if (cluster_k < 1) throw ConfigError("cluster.k must be at least 1");
  if (k_min < 2 || k_min > k_max) throw ConfigError("cluster k range must satisfy 2 <= k_min <= k_max");
  if (kmeans_n_init < 1) throw ConfigError("cluster.n_init must be at least 1");
  if (minibatch_batch_size < 1) throw ConfigError("cluster.batch_size must be at least 1");
  if (!(birch_threshold > 0.0)) throw ConfigError("cluster.birch_threshold must be positive");
  if (birch_branching < 2) throw ConfigError("cluster.birch_branching must be at least 2");
  std::stringstream methods(assign_methods);
  std::string m;
  bool any = false;
  while (std::getline(methods, m, ',')) {
    (void)dimassign::parse_method(m);
    any = true;
  }
  if (!any) throw ConfigError("assign.methods must name at least one method");
  if (model != "boost" && model != "logreg") throw ConfigError("train.model must be boost or logreg");
  boost.validate();
  logreg.validate();
  if (grid.eta.empty() || grid.lambda.empty() || grid.max_depth.empty() || grid.rounds.empty()) {
    throw ConfigError("every tuning grid axis needs at least one value");
  }
  for (double v : grid.eta) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("tune.eta values must lie in [0, 1]");
  }
  for (double v : grid.lambda) {
    if (!(v >= 0.0)) throw ConfigError("tune.lambda values must be non-negative");
  }
  for (int v : grid.max_depth) {
    if (v < 1) throw ConfigError("tune.max_depth values must be at least 1");
  }
  for (int v : grid.rounds) {
    if (v < 0) throw ConfigError("tune.rounds values must be non-negative");
  }
  if (top_k < 1) throw ConfigError("attribute.top_k must be at least 1");
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

std::string toml_real(double v) {
  auto s = format_double(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

template <class T, class F>
std::string list(const std::vector<T>& xs, F&& f) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + f(xs[i]);
  return out + "]";
}

}  // namespace

std::string ExperimentConfig::to_toml() const {
  std::ostringstream o;
  auto num = [](auto v) { return std::to_string(v); };
  o << "[paths]\n"
    << "findings = " << quote(findings) << '\n'
    << "findings_format = " << quote(findings_format) << '\n'
    << "title_embeddings = " << quote(title_embeddings) << '\n'
    << "description_embeddings = " << quote(description_embeddings) << '\n'
    << "output = " << quote(output) << '\n'
    << "run_id = " << quote(run_id) << '\n'
    << "stopwords = " << quote(stopwords) << '\n'
    << "lemmas = " << quote(lemmas) << "\n\n"
    << "[corpus]\n"
    << "n = " << synth_n << '\n'
    << "seed = " << synth_seed << '\n'
    << "profile = " << quote(synth_profile) << '\n'
    << "signal = " << toml_real(synth_signal) << '\n'
    << "confusion = " << toml_real(synth_confusion) << '\n'
    << "severity_levels = " << list(severity_levels, quote) << "\n\n"
    << "[split]\n"
    << "ratios = [" << toml_real(split_ratios.train) << ", " << toml_real(split_ratios.valid) << ", "
    << toml_real(split_ratios.test) << "]\n"
    << "seed = " << split_seed << '\n'
    << "stratify = " << quote(stratify) << "\n\n"
    << "[features]\n"
    << "select = " << quote(std::string(to_string(features))) << '\n'
    << "target = " << quote(target) << '\n'
    << "min_df = " << min_df << "\n\n"
    << "[embed]\n"
    << "dim = " << embed_dim << '\n'
    << "seed = " << embed_seed << "\n\n"
    << "[cluster]\n"
    << "algorithm = " << quote(cluster_algorithm) << '\n'
    << "k = " << cluster_k << '\n'
    << "algorithms = " << quote(sweep_algorithms) << '\n'
    << "k_min = " << k_min << '\n'
    << "k_max = " << k_max << '\n'
    << "seed = " << cluster_seed << '\n'
    << "n_init = " << kmeans_n_init << '\n'
    << "batch_size = " << minibatch_batch_size << '\n'
    << "birch_threshold = " << toml_real(birch_threshold) << '\n'
    << "birch_branching = " << birch_branching << '\n'
    << "threads = " << threads << "\n\n"
    << "[assign]\n"
    << "methods = " << quote(assign_methods) << '\n'
    << "algorithm = " << quote(assign_algorithm) << '\n'
    << "seed = " << assign_seed << "\n\n"
    << "[train]\n"
    << "model = " << quote(model) << "\n\n"
    << "[boost]\n"
    << "rounds = " << boost.rounds << '\n'
    << "eta = " << toml_real(boost.eta) << '\n'
    << "lambda = " << toml_real(boost.lambda) << '\n'
    << "gamma = " << toml_real(boost.gamma) << '\n'
    << "max_depth = " << boost.max_depth << '\n'
    << "min_child_hessian = " << toml_real(boost.min_child_hessian) << '\n'
    << "seed = " << boost.seed << '\n'
    << "verify_objective = " << (boost.verify_objective ? "true" : "false") << "\n\n"
    << "[logreg]\n"
    << "l2 = " << toml_real(logreg.l2) << '\n'
    << "epochs = " << logreg.epochs << '\n'
    << "step = " << toml_real(logreg.step) << "\n\n"
    << "[tune]\n"
    << "grid = " << quote(grid_file) << '\n'
    << "eta = " << list(grid.eta, toml_real) << '\n'
    << "max_depth = " << list(grid.max_depth, num) << '\n'
    << "rounds = " << list(grid.rounds, num) << '\n'
    << "lambda = " << list(grid.lambda, toml_real) << "\n\n"
    << "[attribute]\n"
    << "top_k = " << top_k << '\n';
  return o.str();
}

std::filesystem::path ExperimentConfig::output_dir() const {
  std::filesystem::path p(output);
  return run_id.empty() ? p : p / run_id;
}

boostlab::TuneGrid load_grid(const std::filesystem::path& path) {
  const auto doc = Document::load(path);
  ExperimentConfig c;
  for (const auto& [key, value] : doc.entries()) {
    if (!key.starts_with("tune.") || key == "tune.grid") {
      throw ConfigError("grid file may only contain [tune] eta, max_depth, rounds, lambda; found '" +
                        key + "'");
    }
  }
  c.apply(doc);
  return c.grid;
}

}  // namespace valfind::config
