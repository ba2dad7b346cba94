#include <algorithm>
#include <chrono>
#include <functional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pipeline/artifacts.hpp"
#include "valfind/attriblab.hpp"
#include "valfind/boostlab.hpp"
#include "valfind/clusterlab.hpp"
#include "valfind/csv.hpp"
#include "valfind/dimassign.hpp"
#include "valfind/error.hpp"
#include "valfind/metricsuite.hpp"
#include "valfind/numfmt.hpp"
#include "valfind/pipeline.hpp"
#include "valfind/rng.hpp"

namespace valfind::pipeline {

using namespace detail;
using Json = nlohmann::ordered_json;

std::string_view version() { return VALFIND_VERSION; }

// --- manifest --------------------------------------------------------------------

const StageRecord* Manifest::find(std::string_view name) const {
  for (const auto& s : stages) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

void Manifest::upsert(StageRecord record) {
  for (auto& s : stages) {
    if (s.name == record.name) {
      s = std::move(record);
      return;
    }
  }
  stages.push_back(std::move(record));
}

Manifest Manifest::load(const fs::path& path) {
  Manifest m;
  if (!fs::exists(path)) return m;
  try {
    const auto j = Json::parse(read_file(path));
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config = j.at("config").get<std::string>();
    for (const auto& s : j.at("stages")) {
      StageRecord r;
      r.name = s.at("name").get<std::string>();
      r.input_hash = s.at("input_hash").get<std::string>();
      r.outputs = s.at("outputs").get<std::map<std::string, std::string>>();
      r.wall_ms = s.at("wall_ms").get<double>();
      m.stages.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

void Manifest::save(const fs::path& path) const {
  Json j;
  j["tool"] = "valfind";
  j["tool_version"] = tool_version;
  j["config"] = config;
  Json list = Json::array();
  for (const auto& s : stages) {
    list.push_back({{"name", s.name},
                    {"input_hash", s.input_hash},
                    {"outputs", s.outputs},
                    {"wall_ms", s.wall_ms}});
  }
  j["stages"] = std::move(list);
  write_file(path, j.dump(1) + "\n");
}

namespace {

std::string hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return s;
}

}  // namespace

std::string file_hash(const fs::path& path) { return hex(fnv1a64(read_file(path))); }

// --- stages ----------------------------------------------------------------------

namespace {

using config::ExperimentConfig;

struct Context {
  const ExperimentConfig& cfg;
  fs::path dir;
  std::ostream& log;
};

struct StageSpec {
  std::string record_name;
  std::vector<fs::path> inputs;
  std::string fragment;  // the settings this stage reads
  std::function<std::vector<std::string>(Context&)> body;
};

// "key=value;" pairs describing the settings a stage depends on.
class Fragment {
 public:
  template <class T>
  Fragment& operator()(const char* key, const T& v) {
    out_ << key << '=';
    if constexpr (std::is_same_v<T, double>) {
      out_ << format_double(v);
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      for (const auto& s : v) out_ << s << ',';
    } else {
      out_ << v;
    }
    out_ << ';';
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

Fragment& design_fragment(Fragment& f, const ExperimentConfig& c) {
  return f("features", config::to_string(c.features))("target", c.target)("levels", c.severity_levels);
}

Fragment& boost_fragment(Fragment& f, const boostlab::BoostParams& p) {
  return f("rounds", p.rounds)("eta", p.eta)("lambda", p.lambda)("gamma", p.gamma)(
      "max_depth", p.max_depth)("mch", p.min_child_hessian)("bseed", p.seed)("verify",
                                                                             p.verify_objective);
}

Fragment& cluster_fragment(Fragment& f, const ExperimentConfig& c) {
  return f("features", config::to_string(c.features))("seed", c.cluster_seed)(
      "n_init", c.kmeans_n_init)("batch", c.minibatch_batch_size)("threshold", c.birch_threshold)(
      "branching", c.birch_branching);
}

std::string na_or(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

clusterlab::SweepOptions sweep_options(const ExperimentConfig& c) {
  clusterlab::SweepOptions o;
  o.algorithms = clusterlab::parse_algorithm_list(c.sweep_algorithms);
  o.k_min = c.k_min;
  o.k_max = c.k_max;
  o.seed = c.cluster_seed;
  o.kmeans_n_init = c.kmeans_n_init;
  o.minibatch_batch_size = c.minibatch_batch_size;
  o.birch_threshold = c.birch_threshold;
  o.birch_branching_factor = c.birch_branching;
  o.threads = c.threads;
  return o;
}

std::string cell_column(clusterlab::Algorithm a, std::size_t k) {
  return std::string(clusterlab::to_string(a)) + "_k" + std::to_string(k);
}

// Everything the design-matrix stages read.
std::vector<fs::path> design_inputs(const Context& c) {
  require(c.dir, kFindings, "synth' or 'ingest");
  require(c.dir, kSplit, "split");
  require(c.dir, kTokens, "preprocess");
  require(c.dir, kVocabTitle, "preprocess");
  require(c.dir, kVocabDescription, "preprocess");
  std::vector<fs::path> in{c.dir / kFindings, c.dir / kSplit, c.dir / kTokens, c.dir / kVocabTitle,
                           c.dir / kVocabDescription};
  for (const auto& p : embedding_paths(c.dir, c.cfg)) {
    if (!fs::exists(p)) {
      throw DataError("missing " + p.string() + "; run the 'embed-hash' stage first or set the path");
    }
    in.push_back(p);
  }
  return in;
}

struct Loaded {
  std::vector<corpus::Finding> findings;
  std::vector<Subset> split;
  Targets targets;
  Design design;
};

Loaded load_design(const Context& c) {
  Loaded l;
  l.findings = load_corpus(c.dir, c.cfg);
  l.split = load_split(c.dir / kSplit, l.findings);
  l.targets = targets(c.cfg, l.findings);
  const auto tokens = load_tokens(c.dir / kTokens, l.findings);
  const auto emb = load_aligned_embeddings(c.dir, c.cfg, l.findings);
  l.design = build_design(c.cfg, tokens, load_vocab(c.dir / kVocabTitle),
                          load_vocab(c.dir / kVocabDescription), emb);
  return l;
}

std::pair<Matrix, std::vector<int>> subset(const Loaded& l, Subset s) {
  const auto rows = rows_of(l.split, s);
  std::vector<int> y;
  for (auto r : rows) y.push_back(l.targets.labels[r]);
  return {l.design.x.select_rows(rows), std::move(y)};
}

// ingest / synth -------------------------------------------------------------------

StageSpec ingest_stage(const ExperimentConfig& cfg) {
  if (cfg.findings.empty()) throw ConfigError("ingest needs paths.findings (or --findings)");
  if (!fs::exists(cfg.findings)) throw ConfigError("findings file " + cfg.findings + " does not exist");
  Fragment f;
  f("format", cfg.findings_format)("levels", cfg.severity_levels);
  return {"ingest", {fs::path(cfg.findings)}, f.str(), [](Context& c) {
            const auto findings = corpus::load_findings(
                c.cfg.findings, corpus::parse_file_format(c.cfg.findings_format), severity_scale(c.cfg));
            corpus::save_findings(c.dir / kFindings, findings, corpus::FileFormat::jsonl);
            c.log << "ingested " << findings.size() << " findings\n";
            return std::vector<std::string>{kFindings};
          }};
}

StageSpec synth_stage(const ExperimentConfig& cfg) {
  Fragment f;
  f("n", cfg.synth_n)("seed", cfg.synth_seed)("profile", cfg.synth_profile)("signal", cfg.synth_signal)(
      "confusion", cfg.synth_confusion)("levels", cfg.severity_levels);
  return {"synth", {}, f.str(), [](Context& c) {
            corpus::SyntheticOptions o;
            o.n = c.cfg.synth_n;
            o.seed = c.cfg.synth_seed;
            o.profile = c.cfg.synth_profile == "uniform" ? corpus::uniform_profile()
                                                         : corpus::reference_profile();
            o.separable = c.cfg.synth_profile == "separable";
            o.signal = c.cfg.synth_signal;
            o.confusion = c.cfg.synth_confusion;
            o.severity_scale = severity_scale(c.cfg);
            const auto findings = corpus::generate_synthetic_corpus(o);
            corpus::save_findings(c.dir / kFindings, findings, corpus::FileFormat::jsonl);
            c.log << "generated " << findings.size() << " synthetic findings\n";
            return std::vector<std::string>{kFindings};
          }};
}

// split / preprocess / embed-hash ------------------------------------------------

StageSpec split_stage(const Context& ctx) {
  require(ctx.dir, kFindings, "synth' or 'ingest");
  const auto& cfg = ctx.cfg;
  Fragment f;
  f("ratios", format_double(cfg.split_ratios.train) + "," + format_double(cfg.split_ratios.valid) +
                  "," + format_double(cfg.split_ratios.test))("seed", cfg.split_seed)(
      "stratify", cfg.stratify)("levels", cfg.severity_levels);
  return {"split", {ctx.dir / kFindings}, f.str(), [](Context& c) {
            const auto findings = load_corpus(c.dir, c.cfg);
            const auto split = corpus::stratified_split(findings, c.cfg.split_ratios,
                                                        corpus::parse_stratify(c.cfg.stratify),
                                                        c.cfg.split_seed);
            for (const auto& w : split.warnings) c.log << "warning: " << w << '\n';
            save_split(c.dir / kSplit, findings, split);
            c.log << "split " << split.train.size() << "/" << split.valid.size() << "/"
                  << split.test.size() << '\n';
            return std::vector<std::string>{kSplit};
          }};
}

StageSpec preprocess_stage(const Context& ctx) {
  require(ctx.dir, kFindings, "synth' or 'ingest");
  require(ctx.dir, kSplit, "split");
  const auto& cfg = ctx.cfg;
  std::vector<fs::path> inputs{ctx.dir / kFindings, ctx.dir / kSplit};
  for (const auto& p : {cfg.stopwords, cfg.lemmas}) {
    if (p.empty()) continue;
    if (!fs::exists(p)) throw ConfigError("file " + p + " does not exist");
    inputs.emplace_back(p);
  }
  Fragment f;
  f("min_df", cfg.min_df)("stopwords", !cfg.stopwords.empty())("lemmas", !cfg.lemmas.empty())(
      "levels", cfg.severity_levels);
  return {"preprocess", inputs, f.str(), [](Context& c) {
            const auto findings = load_corpus(c.dir, c.cfg);
            const auto split = load_split(c.dir / kSplit, findings);
            const auto stop = c.cfg.stopwords.empty() ? textprep::default_stopwords()
                                                      : textprep::load_stopwords(c.cfg.stopwords);
            const auto lem = c.cfg.lemmas.empty() ? textprep::default_lemmatizer()
                                                  : textprep::Lemmatizer::from_file(c.cfg.lemmas);
            TokenTable t;
            std::vector<textprep::TokenSequence> train_title, train_description;
            for (std::size_t i = 0; i < findings.size(); ++i) {
              t.title.push_back(
                  textprep::preprocess(findings[i].title, stop, lem, textprep::SourceField::title));
              t.description.push_back(textprep::preprocess(findings[i].description, stop, lem,
                                                           textprep::SourceField::description));
              if (split[i] == Subset::train) {
                train_title.push_back(t.title.back());
                train_description.push_back(t.description.back());
              }
            }
            const auto vt = textprep::Vocabulary::build(train_title, c.cfg.min_df);
            const auto vd = textprep::Vocabulary::build(train_description, c.cfg.min_df);
            save_tokens(c.dir / kTokens, findings, t);
            save_vocab(c.dir / kVocabTitle, vt);
            save_vocab(c.dir / kVocabDescription, vd);
            c.log << "vocabulary: " << vt.size() << " title tokens, " << vd.size()
                  << " description tokens\n";
            return std::vector<std::string>{kTokens, kVocabTitle, kVocabDescription};
          }};
}

StageSpec embed_stage(const Context& ctx) {
  require(ctx.dir, kFindings, "synth' or 'ingest");
  require(ctx.dir, kTokens, "preprocess");
  Fragment f;
  f("dim", ctx.cfg.embed_dim)("seed", ctx.cfg.embed_seed);
  return {"embed-hash", {ctx.dir / kFindings, ctx.dir / kTokens}, f.str(), [](Context& c) {
            const auto findings = load_corpus(c.dir, c.cfg);
            const auto tokens = load_tokens(c.dir / kTokens, findings);
            const auto d = c.cfg.embed_dim;
            const std::string name =
                "feature-hash-d" + std::to_string(d) + "-s" + std::to_string(c.cfg.embed_seed);
            embedspace::EmbeddingMatrix t{{}, Matrix(findings.size(), d), name};
            embedspace::EmbeddingMatrix s{{}, Matrix(findings.size(), d), name};
            for (std::size_t i = 0; i < findings.size(); ++i) {
              t.ids.push_back(findings[i].id);
              s.ids.push_back(findings[i].id);
              const auto a = embedspace::hash_embed(tokens.title[i], d, c.cfg.embed_seed);
              const auto b = embedspace::hash_embed(tokens.description[i], d, c.cfg.embed_seed);
              std::copy(a.begin(), a.end(), t.values.row(i).begin());
              std::copy(b.begin(), b.end(), s.values.row(i).begin());
            }
            embedspace::save_embeddings(c.dir / kTitleEmb, t);
            embedspace::save_embeddings(c.dir / kDescriptionEmb, s);
            return std::vector<std::string>{kTitleEmb, kDescriptionEmb};
          }};
}

// cluster / sweep / assign ---------------------------------------------------------

std::vector<fs::path> cluster_inputs(const Context& c) {
  require(c.dir, kFindings, "synth' or 'ingest");
  std::vector<fs::path> in{c.dir / kFindings};
  for (const auto& p : embedding_paths(c.dir, c.cfg)) {
    if (!fs::exists(p)) {
      throw DataError("missing " + p.string() + "; run the 'embed-hash' stage first or set the path");
    }
    in.push_back(p);
  }
  return in;
}

StageSpec cluster_stage(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  Fragment f;
  cluster_fragment(f, cfg)("algorithm", cfg.cluster_algorithm)("k", cfg.cluster_k);
  return {"cluster", cluster_inputs(ctx), f.str(), [](Context& c) {
            const auto findings = load_corpus(c.dir, c.cfg);
            const auto x = cluster_space(load_aligned_embeddings(c.dir, c.cfg, findings), c.cfg.features);
            auto opt = sweep_options(c.cfg);
            const auto algo = clusterlab::parse_algorithm(c.cfg.cluster_algorithm);
            opt.algorithms = {algo};
            opt.k_min = opt.k_max = c.cfg.cluster_k;
            const auto res = clusterlab::sweep(x, opt);
            const auto& cell = res.cells.front();
            if (!cell.error.empty()) throw NumericError(cell.error);
            const auto name = "clusters_" + cell_column(algo, c.cfg.cluster_k) + ".csv";
            std::ostringstream out;
            csv::write_row(out, {"id", "cluster"});
            for (std::size_t i = 0; i < findings.size(); ++i) {
              csv::write_row(out, {findings[i].id, std::to_string(cell.assignment->labels[i])});
            }
            write_file(c.dir / name, out.str());
            c.log << cell_column(algo, c.cfg.cluster_k) << ": silhouette " << na_or(cell.silhouette)
                  << '\n';
            return std::vector<std::string>{name};
          }};
}

StageSpec sweep_stage(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  Fragment f;
  cluster_fragment(f, cfg)("algorithms", cfg.sweep_algorithms)("k_min", cfg.k_min)("k_max", cfg.k_max)(
      "target", cfg.target)("levels", cfg.severity_levels);
  return {"sweep", cluster_inputs(ctx), f.str(), [](Context& c) {
            const auto findings = load_corpus(c.dir, c.cfg);
            const auto t = targets(c.cfg, findings);
            const auto x = cluster_space(load_aligned_embeddings(c.dir, c.cfg, findings), c.cfg.features);
            const auto opt = sweep_options(c.cfg);
            const auto res = clusterlab::sweep(x, opt);

            csv::Row header{"k"};
            for (auto a : res.algorithms) header.emplace_back(clusterlab::to_string(a));
            std::ostringstream sil, maj, share, errors, assignments;
            for (auto* o : {&sil, &maj, &share}) csv::write_row(*o, header);
            csv::write_row(errors, {"algorithm", "k", "error"});
            for (std::size_t k = res.k_min; k <= res.k_max; ++k) {
              csv::Row rs{std::to_string(k)}, rm{std::to_string(k)}, rh{std::to_string(k)};
              for (auto a : res.algorithms) {
                const auto& cell = res.cell(a, k);
                if (!cell.assignment) {
                  rs.emplace_back("NA");
                  rm.emplace_back("NA");
                  rh.emplace_back("NA");
                  csv::write_row(errors, {std::string(clusterlab::to_string(a)), std::to_string(k),
                                          cell.error});
                  c.log << "warning: " << cell_column(a, k) << " failed: " << cell.error << '\n';
                  continue;
                }
                const auto profile = dimassign::ClusterLabelProfile::build(
                    cell.assignment->labels, t.labels, k, t.classes);
                rs.push_back(na_or(cell.silhouette));
                rm.push_back(format_double(
                    dimassign::majority_accuracy(profile, dimassign::majority_assign(profile)).total));
                rh.push_back(format_double(dimassign::share_accuracy(profile).total));
              }
              csv::write_row(sil, rs);
              csv::write_row(maj, rm);
              csv::write_row(share, rh);
            }
            csv::Row ah{"id"};
            for (const auto& cell : res.cells) ah.push_back(cell_column(cell.algorithm, cell.k));
            csv::write_row(assignments, ah);
            for (std::size_t i = 0; i < findings.size(); ++i) {
              csv::Row r{findings[i].id};
              for (const auto& cell : res.cells) {
                r.push_back(cell.assignment ? std::to_string(cell.assignment->labels[i]) : "NA");
              }
              csv::write_row(assignments, r);
            }
            write_file(c.dir / kSweepSilhouette, sil.str());
            write_file(c.dir / kSweepAccuracy, maj.str());
            write_file(c.dir / kSweepAccuracyShare, share.str());
            write_file(c.dir / kSweepErrors, errors.str());
            write_file(c.dir / kSweepAssignments, assignments.str());
            c.log << "sweep: " << res.cells.size() << " cells\n";
            return std::vector<std::string>{kSweepSilhouette, kSweepAccuracy, kSweepAccuracyShare,
                                            kSweepErrors, kSweepAssignments};
          }};
}

std::vector<std::string> methods_of(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  std::stringstream ss(cfg.assign_methods);
  std::string m;
  while (std::getline(ss, m, ',')) out.push_back(std::string(dimassign::to_string(dimassign::parse_method(m))));
  return out;
}

StageSpec assign_stage(const Context& ctx) {
  require(ctx.dir, kFindings, "synth' or 'ingest");
  require(ctx.dir, kSweepAssignments, "sweep");
  const auto& cfg = ctx.cfg;
  Fragment f;
  f("methods", methods_of(cfg))("algorithm", cfg.assign_algorithm)("seed", cfg.assign_seed)(
      "target", cfg.target)("levels", cfg.severity_levels);
  return {"assign", {ctx.dir / kFindings, ctx.dir / kSweepAssignments}, f.str(), [](Context& c) {
            const auto findings = load_corpus(c.dir, c.cfg);
            const auto t = targets(c.cfg, findings);
            std::istringstream in(read_file(c.dir / kSweepAssignments));
            const auto records = csv::parse(in);
            if (records.empty() || records[0].fields.empty() || records[0].fields[0] != "id") {
              throw DataError(std::string(kSweepAssignments) + ": expected header starting with id");
            }
            if (records.size() != findings.size() + 1) {
              throw DataError(std::string(kSweepAssignments) + " does not cover the corpus; rerun sweep");
            }
            const auto algo = std::string(
                clusterlab::to_string(clusterlab::parse_algorithm(c.cfg.assign_algorithm)));
            // Columns of the chosen algorithm, by k.
            std::vector<std::pair<std::size_t, std::size_t>> columns;
            const auto& head = records[0].fields;
            for (std::size_t j = 1; j < head.size(); ++j) {
              const auto prefix = algo + "_k";
              if (head[j].starts_with(prefix)) {
                columns.emplace_back(static_cast<std::size_t>(parse_int(head[j].substr(prefix.size()))), j);
              }
            }
            if (columns.empty()) {
              throw DataError("the sweep has no " + algo + " cells; include it in the sweep algorithms");
            }
            for (std::size_t i = 0; i < findings.size(); ++i) {
              if (records[i + 1].fields.size() != head.size() || records[i + 1].fields[0] != findings[i].id) {
                throw DataError(std::string(kSweepAssignments) + ":" + std::to_string(records[i + 1].line) +
                                ": row does not match the corpus; rerun sweep");
              }
            }
            std::vector<std::string> outputs;
            for (const auto& method_name : methods_of(c.cfg)) {
              const auto method = dimassign::parse_method(method_name);
              std::ostringstream out;
              csv::Row header{"k"};
              header.insert(header.end(), t.classes.begin(), t.classes.end());
              header.emplace_back("total");
              csv::write_row(out, header);
              for (const auto& [k, col] : columns) {
                csv::Row row{std::to_string(k)};
                std::vector<int> cluster_of;
                bool failed = false;
                for (std::size_t i = 0; i < findings.size(); ++i) {
                  const auto& v = records[i + 1].fields[col];
                  if (v == "NA") {
                    failed = true;
                    break;
                  }
                  cluster_of.push_back(static_cast<int>(parse_int(v)));
                }
                if (failed) {
                  row.insert(row.end(), t.classes.size() + 1, "NA");
                  csv::write_row(out, row);
                  continue;
                }
                const auto profile =
                    dimassign::ClusterLabelProfile::build(cluster_of, t.labels, k, t.classes);
                dimassign::AccuracyTable table;
                switch (method) {
                  case dimassign::Method::majority:
                    table = dimassign::majority_accuracy(profile, dimassign::majority_assign(profile));
                    break;
                  case dimassign::Method::share:
                    table = dimassign::share_accuracy(profile);
                    break;
                  case dimassign::Method::sampled: {
                    const auto draws = dimassign::sampled_share_assign(
                        profile, cluster_of, hash_combine(c.cfg.assign_seed, k));
                    table = dimassign::accuracy_from_predictions(t.labels, draws, t.classes,
                                                                 dimassign::Method::sampled);
                    break;
                  }
                }
                for (const auto& v : table.per_label) row.push_back(na_or(v));
                row.push_back(format_double(table.total));
                csv::write_row(out, row);
              }
              const auto name = assign_file(method_name);
              write_file(c.dir / name, out.str());
              outputs.push_back(name);
            }
            return outputs;
          }};
}

// train / tune / eval ----------------------------------------------------------------

StageSpec train_stage(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  Fragment f;
  design_fragment(f, cfg)("model", cfg.model);
  if (cfg.model == "boost") {
    boost_fragment(f, cfg.boost);
  } else {
    f("l2", cfg.logreg.l2)("epochs", cfg.logreg.epochs)("step", cfg.logreg.step);
  }
  return {"train:" + cfg.model, design_inputs(ctx), f.str(), [](Context& c) {
            const auto l = load_design(c);
            const auto [x, y] = subset(l, Subset::train);
            const auto name = model_file(c.cfg.model);
            if (c.cfg.model == "boost") {
              const auto m = boostlab::train_boosted(x, y, l.targets.classes, c.cfg.boost);
              boostlab::save_model(c.dir / name, m);
              c.log << "boosted model: " << m.rounds() << " rounds, objective "
                    << format_double(m.objective_trace.front()) << " -> "
                    << format_double(m.objective_trace.back()) << '\n';
            } else {
              const auto m = boostlab::train_logreg(x, y, l.targets.classes, c.cfg.logreg);
              boostlab::save_model(c.dir / name, m);
              c.log << "logistic model: " << m.epochs_run << " epochs, " << m.kept.size()
                    << " non-constant features\n";
            }
            return std::vector<std::string>{name};
          }};
}

StageSpec tune_stage(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto inputs = design_inputs(ctx);
  auto grid = cfg.grid;
  if (!cfg.grid_file.empty()) {
    if (!fs::exists(cfg.grid_file)) throw ConfigError("grid file " + cfg.grid_file + " does not exist");
    grid = config::load_grid(cfg.grid_file);
    inputs.emplace_back(cfg.grid_file);
  }
  Fragment f;
  design_fragment(f, cfg);
  boost_fragment(f, cfg.boost);
  auto join = [](const auto& xs) {
    std::string s;
    for (const auto& v : xs) s += format_double(static_cast<double>(v)) + ",";
    return s;
  };
  f("grid_eta", join(grid.eta))("grid_depth", join(grid.max_depth))("grid_rounds", join(grid.rounds))(
      "grid_lambda", join(grid.lambda));
  return {"tune", inputs, f.str(), [grid](Context& c) {
            const auto l = load_design(c);
            const auto [xt, yt] = subset(l, Subset::train);
            const auto [xv, yv] = subset(l, Subset::valid);
            const auto outcome =
                boostlab::tune_boosted(xt, yt, xv, yv, l.targets.classes, c.cfg.boost, grid);
            std::ostringstream out;
            csv::write_row(out, {"eta", "max_depth", "lambda", "rounds", "valid_accuracy", "best"});
            for (std::size_t i = 0; i < outcome.results.size(); ++i) {
              const auto& r = outcome.results[i];
              csv::write_row(out, {format_double(r.params.eta), std::to_string(r.params.max_depth),
                                   format_double(r.params.lambda), std::to_string(r.params.rounds),
                                   format_double(r.valid_accuracy), i == outcome.best ? "1" : "0"});
            }
            write_file(c.dir / kTuneResults, out.str());
            const auto& best = outcome.results[outcome.best];
            const auto m = boostlab::train_boosted(xt, yt, l.targets.classes, best.params);
            boostlab::save_model(c.dir / model_file("boost_tuned"), m);
            c.log << "tuned: eta " << format_double(best.params.eta) << ", max_depth "
                  << best.params.max_depth << ", lambda " << format_double(best.params.lambda)
                  << ", rounds " << best.params.rounds << " (valid accuracy "
                  << format_fixed(best.valid_accuracy, 3) << ")\n";
            return std::vector<std::string>{kTuneResults, model_file("boost_tuned")};
          }};
}

StageSpec eval_stage(const Context& ctx) {
  auto inputs = design_inputs(ctx);
  std::vector<std::string> models;
  for (const auto& name : kModelNames) {
    if (fs::exists(ctx.dir / model_file(name))) {
      models.push_back(name);
      inputs.push_back(ctx.dir / model_file(name));
    }
  }
  if (models.empty()) throw DataError("no trained model in " + ctx.dir.string() + "; run the 'train' stage first");
  Fragment f;
  design_fragment(f, ctx.cfg)("models", models);
  return {"eval", inputs, f.str(), [models](Context& c) {
            const auto l = load_design(c);
            std::vector<std::string> outputs;
            for (const auto& name : models) {
              const bool logreg = name == "logreg";
              const auto boosted = logreg ? boostlab::BoostedModel{} : boostlab::load_boosted(c.dir / model_file(name));
              const auto linear = logreg ? boostlab::load_logreg(c.dir / model_file(name)) : boostlab::LogRegModel{};
              const auto& classes = logreg ? linear.classes : boosted.classes;
              if (classes != l.targets.classes) {
                throw DataError(model_file(name) + " was trained on other classes; rerun train");
              }
              for (std::size_t s = 0; s < kSubsets.size(); ++s) {
                const auto [x, y] = subset(l, static_cast<Subset>(s));
                if (y.empty()) {
                  c.log << "warning: " << kSubsets[s] << " split is empty; no report\n";
                  continue;
                }
                const auto pred = logreg ? boostlab::predict_logreg_classes(linear, x)
                                         : boostlab::predict_classes(boosted, x);
                const auto cm = metricsuite::confusion(y, pred, classes);
                const auto rep = metricsuite::report(cm);
                const auto base = report_file(name, kSubsets[s], "");
                write_file(c.dir / (base + "txt"), metricsuite::render_text(rep));
                write_file(c.dir / (base + "csv"), metricsuite::render_csv(rep));
                write_file(c.dir / (base + "json"), metricsuite::render_json(rep, cm));
                for (const char* ext : {"txt", "csv", "json"}) outputs.push_back(base + ext);
                c.log << name << " " << kSubsets[s] << " accuracy " << format_fixed(rep.accuracy, 3) << '\n';
              }
            }
            return outputs;
          }};
}

// attribute / report ----------------------------------------------------------------

StageSpec attribute_stage(const Context& ctx) {
  auto inputs = design_inputs(ctx);
  require(ctx.dir, model_file("boost"), "train");
  inputs.push_back(ctx.dir / model_file("boost"));
  const bool with_logreg = fs::exists(ctx.dir / model_file("logreg"));
  if (with_logreg) inputs.push_back(ctx.dir / model_file("logreg"));
  Fragment f;
  design_fragment(f, ctx.cfg)("top_k", ctx.cfg.top_k)("logreg", with_logreg);
  return {"attribute", inputs, f.str(), [with_logreg](Context& c) {
            const auto l = load_design(c);
            const auto& layout = *l.design.layout;
            const auto model = boostlab::load_boosted(c.dir / model_file("boost"));
            std::vector<std::string> outputs;
            const auto gain = attriblab::rank_tokens_gain(model, layout, c.cfg.top_k);
            write_file(c.dir / kRankingsBoost, attriblab::rankings_csv(gain));
            outputs.push_back(kRankingsBoost);
            std::string md = "### Boosted trees (total split gain)\n\n" + attriblab::rankings_markdown(gain);
            if (with_logreg) {
              const auto lr = boostlab::load_logreg(c.dir / model_file("logreg"));
              const auto coef = attriblab::rank_tokens_logreg(lr, layout, c.cfg.top_k);
              write_file(c.dir / kRankingsLogreg, attriblab::rankings_csv(coef));
              outputs.push_back(kRankingsLogreg);
              md += "\n### Logistic regression (absolute standardized coefficient)\n\n" +
                    attriblab::rankings_markdown(coef);
            }
            write_file(c.dir / kRankingsMd, md);
            outputs.push_back(kRankingsMd);

            std::vector<attriblab::AttributionVector> all;
            std::ostringstream jsonl;
            for (auto r : rows_of(l.split, Subset::test)) {
              const auto x = l.design.x.row(r);
              const int cls = boostlab::predict_class(model, x);
              auto a = attriblab::path_attribution(model, x, cls);
              const auto margin = boostlab::predict_margins(model, x)[static_cast<std::size_t>(cls)];
              Json j;
              j["id"] = l.findings[r].id;
              j["class"] = model.classes[static_cast<std::size_t>(cls)];
              j["baseline"] = a.baseline;
              j["margin"] = margin;
              Json contrib = Json::array();
              for (std::size_t fi = 0; fi < a.contributions.size(); ++fi) {
                if (a.contributions[fi] == 0.0) continue;
                const auto ref = layout.describe(fi);
                contrib.push_back(Json::array(
                    {fi, std::string(embedspace::to_string(ref.block)) + ":" + ref.name, a.contributions[fi]}));
              }
              j["contributions"] = std::move(contrib);
              jsonl << j.dump() << '\n';
              all.push_back(std::move(a));
            }
            write_file(c.dir / kAttributions, jsonl.str());
            write_file(c.dir / kBlockSummary,
                       attriblab::block_summary_csv(attriblab::block_summary(all, layout)));
            outputs.push_back(kAttributions);
            outputs.push_back(kBlockSummary);
            return outputs;
          }};
}

StageSpec report_stage(const Context& ctx) {
  std::vector<fs::path> inputs;
  if (fs::exists(ctx.dir)) {
    for (const auto& e : fs::directory_iterator(ctx.dir)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && name != kReport && name != kManifest) inputs.push_back(e.path());
    }
  }
  std::sort(inputs.begin(), inputs.end());
  return {"report", inputs, "", [](Context& c) {
            write_file(c.dir / kReport, render_report(c.dir));
            return std::vector<std::string>{kReport};
          }};
}

StageSpec make_spec(const Context& ctx, std::string_view stage) {
  if (stage == "ingest") return ingest_stage(ctx.cfg);
  if (stage == "synth") return synth_stage(ctx.cfg);
  if (stage == "split") return split_stage(ctx);
  if (stage == "preprocess") return preprocess_stage(ctx);
  if (stage == "embed-hash") return embed_stage(ctx);
  if (stage == "cluster") return cluster_stage(ctx);
  if (stage == "sweep") return sweep_stage(ctx);
  if (stage == "assign") return assign_stage(ctx);
  if (stage == "train") return train_stage(ctx);
  if (stage == "tune") return tune_stage(ctx);
  if (stage == "eval") return eval_stage(ctx);
  if (stage == "attribute") return attribute_stage(ctx);
  if (stage == "report") return report_stage(ctx);
  throw ConfigError("unknown stage '" + std::string(stage) + "'");
}

}  // namespace

StageResult run_stage(const ExperimentConfig& cfg, std::string_view stage, std::ostream& log) {
  cfg.validate();
  if (std::find(kStages.begin(), kStages.end(), stage) == kStages.end()) {
    throw ConfigError("unknown stage '" + std::string(stage) + "'");
  }
  const auto dir = cfg.output_dir();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
  Context ctx{cfg, dir, log};
  auto spec = make_spec(ctx, stage);

  std::uint64_t h = fnv1a64(spec.record_name);
  h = hash_combine(h, spec.fragment);
  for (const auto& p : spec.inputs) h = hash_combine(h, file_hash(p));
  const auto input_hash = hex(h);

  const auto manifest_path = dir / kManifest;
  auto manifest = Manifest::load(manifest_path);
  StageResult result{spec.record_name, false, {}};
  if (const auto* prev = manifest.find(spec.record_name); prev && prev->input_hash == input_hash) {
    const bool intact = std::all_of(prev->outputs.begin(), prev->outputs.end(), [&](const auto& kv) {
      return fs::exists(dir / kv.first) && file_hash(dir / kv.first) == kv.second;
    });
    if (intact) {
      log << spec.record_name << ": up to date, skipped\n";
      result.cached = true;
      for (const auto& kv : prev->outputs) result.outputs.push_back(kv.first);
      return result;
    }
  }

  const auto start = std::chrono::steady_clock::now();
  result.outputs = spec.body(ctx);
  const auto stop = std::chrono::steady_clock::now();
  StageRecord rec;
  rec.name = spec.record_name;
  rec.input_hash = input_hash;
  for (const auto& o : result.outputs) rec.outputs[o] = file_hash(dir / o);
  rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  manifest.tool_version = std::string(version());
  manifest.config = cfg.to_toml();
  manifest.upsert(std::move(rec));
  manifest.save(manifest_path);
  log << spec.record_name << ": done in " << format_fixed(manifest.find(spec.record_name)->wall_ms, 0)
      << " ms\n";
  return result;
}

std::vector<StageResult> run_all(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  std::vector<StageResult> out;
  out.push_back(run_stage(cfg, cfg.findings.empty() ? "synth" : "ingest", log));
  for (auto s : {"split", "preprocess"}) out.push_back(run_stage(cfg, s, log));
  if (cfg.title_embeddings.empty() || cfg.description_embeddings.empty()) {
    out.push_back(run_stage(cfg, "embed-hash", log));
  }
  for (auto s : {"sweep", "assign"}) out.push_back(run_stage(cfg, s, log));
  for (const char* model : {"boost", "logreg"}) {
    auto c = cfg;
    c.model = model;
    out.push_back(run_stage(c, "train", log));
  }
  for (auto s : {"tune", "eval", "attribute", "report"}) out.push_back(run_stage(cfg, s, log));
  return out;
}

}  // namespace valfind::pipeline
