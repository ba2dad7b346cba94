#include "pipeline/artifacts.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "valfind/csv.hpp"
#include "valfind/error.hpp"
#include "valfind/numfmt.hpp"

namespace valfind::pipeline::detail {

using Json = nlohmann::ordered_json;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require(const fs::path& dir, const std::string& file, const std::string& producer) {
  if (!fs::exists(dir / file)) {
    throw DataError("missing " + (dir / file).string() + "; run the '" + producer + "' stage first");
  }
}

corpus::SeverityScale severity_scale(const config::ExperimentConfig& cfg) {
  return corpus::SeverityScale(cfg.severity_levels);
}

std::vector<corpus::Finding> load_corpus(const fs::path& dir, const config::ExperimentConfig& cfg) {
  require(dir, kFindings, "synth' or 'ingest");
  return corpus::load_findings(dir / kFindings, corpus::FileFormat::jsonl, severity_scale(cfg));
}

namespace {

const char* subset_name(Subset s) {
  switch (s) {
    case Subset::train: return "train";
    case Subset::valid: return "valid";
    case Subset::test: return "test";
  }
  return "?";
}

std::unordered_map<std::string, std::size_t> id_index(const std::vector<corpus::Finding>& findings) {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < findings.size(); ++i) idx.emplace(findings[i].id, i);
  return idx;
}

}  // namespace

void save_split(const fs::path& path, const std::vector<corpus::Finding>& findings,
                const corpus::Split& split) {
  std::unordered_map<std::string, Subset> of;
  for (const auto& f : split.train) of[f.id] = Subset::train;
  for (const auto& f : split.valid) of[f.id] = Subset::valid;
  for (const auto& f : split.test) of[f.id] = Subset::test;
  std::ostringstream out;
  csv::write_row(out, {"id", "split"});
  for (const auto& f : findings) csv::write_row(out, {f.id, subset_name(of.at(f.id))});
  write_file(path, out.str());
}

std::vector<Subset> load_split(const fs::path& path, const std::vector<corpus::Finding>& findings) {
  std::istringstream in(read_file(path));
  const auto records = csv::parse(in);
  if (records.empty() || records[0].fields != csv::Row{"id", "split"}) {
    throw DataError(path.string() + ": expected header id,split");
  }
  const auto idx = id_index(findings);
  std::vector<int> seen(findings.size(), -1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const auto where = path.string() + ":" + std::to_string(rec.line);
    if (rec.fields.size() != 2) throw DataError(where + ": expected two fields");
    auto it = idx.find(rec.fields[0]);
    if (it == idx.end()) throw DataError(where + ": unknown id '" + rec.fields[0] + "'");
    const auto& s = rec.fields[1];
    const int v = s == "train" ? 0 : s == "valid" ? 1 : s == "test" ? 2 : -1;
    if (v < 0) throw DataError(where + ": split must be train, valid or test");
    if (seen[it->second] >= 0) throw DataError(where + ": id listed twice");
    seen[it->second] = v;
  }
  std::vector<Subset> out;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    if (seen[i] < 0) throw DataError(path.string() + ": no split for '" + findings[i].id + "'; rerun split");
    out.push_back(static_cast<Subset>(seen[i]));
  }
  return out;
}

void save_tokens(const fs::path& path, const std::vector<corpus::Finding>& findings,
                 const TokenTable& tokens) {
  std::ostringstream out;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    Json j;
    j["id"] = findings[i].id;
    j["title"] = tokens.title[i].tokens;
    j["description"] = tokens.description[i].tokens;
    out << j.dump() << '\n';
  }
  write_file(path, out.str());
}

TokenTable load_tokens(const fs::path& path, const std::vector<corpus::Finding>& findings) {
  std::istringstream in(read_file(path));
  TokenTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    try {
      const auto j = Json::parse(line);
      const auto i = t.title.size();
      if (i >= findings.size() || j.at("id").get<std::string>() != findings[i].id) {
        throw DataError(where + ": token rows do not follow the corpus; rerun preprocess");
      }
      t.title.push_back({j.at("title").get<std::vector<std::string>>(), textprep::SourceField::title});
      t.description.push_back(
          {j.at("description").get<std::vector<std::string>>(), textprep::SourceField::description});
    } catch (const Json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  if (t.title.size() != findings.size()) {
    throw DataError(path.string() + ": token rows do not cover the corpus; rerun preprocess");
  }
  return t;
}

void save_vocab(const fs::path& path, const textprep::Vocabulary& vocab) {
  std::ostringstream out;
  out << "#min_df\t" << vocab.min_df() << '\n';
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.token(i) << '\t' << vocab.document_frequency(i) << '\n';
  }
  write_file(path, out.str());
}

textprep::Vocabulary load_vocab(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t min_df = 1, line_no = 0;
  std::vector<std::pair<std::string, std::size_t>> entries;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected token<TAB>df");
    }
    const auto value = static_cast<std::size_t>(parse_int(std::string_view(line).substr(tab + 1)));
    if (line.starts_with("#min_df")) {
      min_df = value;
    } else {
      entries.emplace_back(line.substr(0, tab), value);
    }
  }
  return textprep::Vocabulary::from_entries(std::move(entries), min_df);
}

std::vector<fs::path> embedding_paths(const fs::path& dir, const config::ExperimentConfig& cfg) {
  return {cfg.title_embeddings.empty() ? dir / kTitleEmb : fs::path(cfg.title_embeddings),
          cfg.description_embeddings.empty() ? dir / kDescriptionEmb
                                             : fs::path(cfg.description_embeddings)};
}

namespace {

Matrix aligned(const embedspace::EmbeddingMatrix& e, const std::vector<corpus::Finding>& findings,
               const fs::path& path) {
  Matrix m(findings.size(), e.dim());
  for (std::size_t i = 0; i < findings.size(); ++i) {
    std::size_t r;
    try {
      r = e.row_of(findings[i].id);
    } catch (const DataError&) {
      throw DataError(path.string() + ": no embedding for finding '" + findings[i].id + "'");
    }
    const auto src = e.values.row(r);
    std::copy(src.begin(), src.end(), m.row(i).begin());
  }
  return m;
}

}  // namespace

Embeddings load_aligned_embeddings(const fs::path& dir, const config::ExperimentConfig& cfg,
                                   const std::vector<corpus::Finding>& findings) {
  const auto paths = embedding_paths(dir, cfg);
  for (const auto& p : paths) {
    if (!fs::exists(p)) {
      throw DataError("missing " + p.string() + "; run the 'embed-hash' stage first or set the path");
    }
  }
  const auto t = embedspace::load_embeddings(paths[0]);
  const auto d = embedspace::load_embeddings(paths[1]);
  return {aligned(t, findings, paths[0]), aligned(d, findings, paths[1]), t.model_name, d.model_name};
}

Matrix cluster_space(const Embeddings& emb, config::FeatureSelect select) {
  Matrix t = emb.title, d = emb.description;
  normalize_rows(t);
  normalize_rows(d);
  switch (select) {
    case config::FeatureSelect::title: return t;
    case config::FeatureSelect::description: return d;
    case config::FeatureSelect::fused: return Matrix::hconcat(t, d);
  }
  return t;
}

std::shared_ptr<const embedspace::FeatureLayout> design_layout(
    const config::ExperimentConfig& cfg, const textprep::Vocabulary& title_vocab,
    const textprep::Vocabulary& description_vocab, const Embeddings& emb) {
  const bool use_title = cfg.features != config::FeatureSelect::description;
  const bool use_description = cfg.features != config::FeatureSelect::title;
  return std::make_shared<const embedspace::FeatureLayout>(
      use_title ? title_vocab.tokens() : std::vector<std::string>{},
      use_description ? description_vocab.tokens() : std::vector<std::string>{},
      use_title ? emb.title.cols() : 0, use_description ? emb.description.cols() : 0);
}

Design build_design(const config::ExperimentConfig& cfg, const TokenTable& tokens,
                    const textprep::Vocabulary& title_vocab,
                    const textprep::Vocabulary& description_vocab, const Embeddings& emb) {
  const auto layout = design_layout(cfg, title_vocab, description_vocab, emb);
  const bool use_title = layout->width(embedspace::Block::title_embedding) > 0;
  const bool use_description = layout->width(embedspace::Block::description_embedding) > 0;
  const textprep::Vocabulary empty;
  std::vector<embedspace::FeatureVector> rows;
  rows.reserve(tokens.title.size());
  for (std::size_t i = 0; i < tokens.title.size(); ++i) {
    const auto tb = use_title ? textprep::vectorize(tokens.title[i], title_vocab) : textprep::BagOfTokens{};
    const auto db = use_description ? textprep::vectorize(tokens.description[i], description_vocab)
                                    : textprep::BagOfTokens{};
    rows.push_back(embedspace::fuse_features(
        tb, db, use_title ? emb.title.row(i) : std::span<const double>{},
        use_description ? emb.description.row(i) : std::span<const double>{}, layout));
  }
  auto fm = embedspace::FeatureMatrix::stack(rows);
  return {layout, std::move(fm.rows)};
}

Targets targets(const config::ExperimentConfig& cfg, const std::vector<corpus::Finding>& findings) {
  Targets t;
  if (cfg.target == "dimension") {
    t.classes = corpus::dimension_names();
    for (const auto& f : findings) {
      if (!f.dimension) throw DataError("finding '" + f.id + "' has no dimension label");
      t.labels.push_back(static_cast<int>(*f.dimension));
    }
  } else {
    const auto scale = severity_scale(cfg);
    t.classes = scale.levels();
    for (const auto& f : findings) {
      if (!f.severity) throw DataError("finding '" + f.id + "' has no severity label");
      t.labels.push_back(static_cast<int>(scale.rank(*f.severity)));
    }
  }
  return t;
}

std::vector<std::size_t> rows_of(const std::vector<Subset>& split, Subset s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == s) out.push_back(i);
  }
  return out;
}

}  // namespace valfind::pipeline::detail
