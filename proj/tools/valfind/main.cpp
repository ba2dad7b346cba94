// valfind: command-line driver for the findings analysis pipeline.
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "valfind/config.hpp"
#include "valfind/corpus.hpp"
#include "valfind/error.hpp"
#include "valfind/pipeline.hpp"

namespace {

using valfind::config::ExperimentConfig;

enum ExitCode { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kNumeric = 4 };

// Flag values land here; only flags the user actually passed are applied,
// after the config file, so flag > file > default.
struct Overrides {
  std::vector<std::function<void(ExperimentConfig&)>> apply;

  template <class T, class F>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& help, F&& setter) {
    auto holder = std::make_shared<T>();
    auto* opt = app->add_option(name, *holder, help);
    apply.push_back([holder, opt, setter](ExperimentConfig& c) {
      if (opt->count() > 0) setter(c, *holder);
    });
    return opt;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Deterministic pipeline for clustering and classifying model-validation findings"};
  app.set_version_flag("--version", std::string(valfind::pipeline::version()));
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("-c,--config", config_path, "Experiment config file (TOML)")
      ->check(CLI::ExistingFile);
  Overrides ov;
  using C = ExperimentConfig;
  ov.add<std::string>(&app, "-o,--output", "Output directory",
                      [](C& c, const std::string& v) { c.output = v; });
  ov.add<std::string>(&app, "--run-id", "Subdirectory of the output directory for this run",
                      [](C& c, const std::string& v) { c.run_id = v; });
  ov.add<std::string>(&app, "--features", "Feature selection: title|description|fused",
                      [](C& c, const std::string& v) {
                        c.features = valfind::config::parse_feature_select(v);
                      });
  ov.add<std::string>(&app, "--target", "Label to predict: dimension|severity",
                      [](C& c, const std::string& v) { c.target = v; });
  ov.add<std::string>(&app, "--title-emb", "EMB1 file with title embeddings",
                      [](C& c, const std::string& v) { c.title_embeddings = v; });
  ov.add<std::string>(&app, "--description-emb", "EMB1 file with description embeddings",
                      [](C& c, const std::string& v) { c.description_embeddings = v; });
  ov.add<std::size_t>(&app, "--threads", "Worker threads for the sweep (0 = all cores)",
                      [](C& c, std::size_t v) { c.threads = v; });

  auto* ingest = app.add_subcommand("ingest", "Load and validate a findings file");
  ov.add<std::string>(ingest, "--findings", "Findings file", [](C& c, const std::string& v) {
    c.findings = v;
  });
  ov.add<std::string>(ingest, "--format", "jsonl|csv",
                      [](C& c, const std::string& v) { c.findings_format = v; });

  auto* synth = app.add_subcommand("synth", "Generate a synthetic findings corpus");
  ov.add<std::size_t>(synth, "--n", "Number of findings", [](C& c, std::size_t v) { c.synth_n = v; });
  ov.add<std::uint64_t>(synth, "--seed", "Seed", [](C& c, std::uint64_t v) { c.synth_seed = v; });
  ov.add<std::string>(synth, "--profile", "reference|uniform|separable",
                      [](C& c, const std::string& v) { c.synth_profile = v; });

  auto* split = app.add_subcommand("split", "Stratified train/valid/test split");
  ov.add<std::string>(split, "--ratios", "train,valid,test fractions",
                      [](C& c, const std::string& v) {
                        c.split_ratios = valfind::corpus::SplitRatios::parse(v);
                      });
  ov.add<std::uint64_t>(split, "--seed", "Seed", [](C& c, std::uint64_t v) { c.split_seed = v; });
  ov.add<std::string>(split, "--stratify", "dimension|severity",
                      [](C& c, const std::string& v) { c.stratify = v; });

  auto* prep = app.add_subcommand("preprocess", "Tokenize, lemmatize and build vocabularies");
  ov.add<std::size_t>(prep, "--min-df", "Minimum document frequency",
                      [](C& c, std::size_t v) { c.min_df = v; });
  ov.add<std::string>(prep, "--stopwords", "Stopword list file",
                      [](C& c, const std::string& v) { c.stopwords = v; });
  ov.add<std::string>(prep, "--lemmas", "Lemma exception table",
                      [](C& c, const std::string& v) { c.lemmas = v; });

  auto* embed = app.add_subcommand("embed-hash", "Signed feature-hashing embeddings");
  ov.add<std::size_t>(embed, "--dim", "Embedding width", [](C& c, std::size_t v) { c.embed_dim = v; });
  ov.add<std::uint64_t>(embed, "--seed", "Seed", [](C& c, std::uint64_t v) { c.embed_seed = v; });

  auto* cluster = app.add_subcommand("cluster", "Run one clustering algorithm");
  ov.add<std::string>(cluster, "--algo", "kmeans|minibatch|agglomerative_ward|birch|spectral",
                      [](C& c, const std::string& v) { c.cluster_algorithm = v; });
  ov.add<std::size_t>(cluster, "--k", "Number of clusters", [](C& c, std::size_t v) { c.cluster_k = v; });
  ov.add<std::uint64_t>(cluster, "--seed", "Seed", [](C& c, std::uint64_t v) { c.cluster_seed = v; });

  auto* sweep = app.add_subcommand("sweep", "Every algorithm over a range of k");
  ov.add<std::string>(sweep, "--algos", "all or a comma-separated list",
                      [](C& c, const std::string& v) { c.sweep_algorithms = v; });
  ov.add<std::size_t>(sweep, "--kmin", "Smallest k", [](C& c, std::size_t v) { c.k_min = v; });
  ov.add<std::size_t>(sweep, "--kmax", "Largest k", [](C& c, std::size_t v) { c.k_max = v; });
  ov.add<std::uint64_t>(sweep, "--seed", "Seed", [](C& c, std::uint64_t v) { c.cluster_seed = v; });

  auto* assign = app.add_subcommand("assign", "Cluster-to-label assignment accuracy");
  ov.add<std::string>(assign, "--method", "majority|share|sampled (comma-separated)",
                      [](C& c, const std::string& v) { c.assign_methods = v; });
  ov.add<std::string>(assign, "--algo", "Sweep algorithm to tabulate",
                      [](C& c, const std::string& v) { c.assign_algorithm = v; });
  ov.add<std::uint64_t>(assign, "--seed", "Seed for sampled draws",
                        [](C& c, std::uint64_t v) { c.assign_seed = v; });

  auto* train = app.add_subcommand("train", "Fit a classifier on the training split");
  ov.add<std::string>(train, "--model", "boost|logreg", [](C& c, const std::string& v) { c.model = v; });
  ov.add<double>(train, "--eta", "Learning rate", [](C& c, double v) { c.boost.eta = v; });
  ov.add<double>(train, "--lambda", "Leaf L2 penalty", [](C& c, double v) { c.boost.lambda = v; });
  ov.add<double>(train, "--gamma", "Split penalty", [](C& c, double v) { c.boost.gamma = v; });
  ov.add<int>(train, "--max-depth", "Tree depth", [](C& c, int v) { c.boost.max_depth = v; });
  ov.add<int>(train, "--rounds", "Trees per class", [](C& c, int v) { c.boost.rounds = v; });
  ov.add<double>(train, "--min-child-hessian", "Minimum hessian per child",
                 [](C& c, double v) { c.boost.min_child_hessian = v; });
  ov.add<double>(train, "--l2", "Logistic ridge penalty", [](C& c, double v) { c.logreg.l2 = v; });
  ov.add<int>(train, "--epochs", "Logistic gradient steps", [](C& c, int v) { c.logreg.epochs = v; });
  ov.add<double>(train, "--step", "Logistic step size", [](C& c, double v) { c.logreg.step = v; });

  auto* tune = app.add_subcommand("tune", "Grid search boosting hyperparameters on the validation split");
  ov.add<std::string>(tune, "--grid", "Grid file ([tune] eta, max_depth, rounds, lambda)",
                      [](C& c, const std::string& v) { c.grid_file = v; });

  auto* eval = app.add_subcommand("eval", "Classification reports for every trained model");
  auto* attribute = app.add_subcommand("attribute", "Token rankings and per-instance attributions");
  ov.add<std::size_t>(attribute, "--top-k", "Tokens per class", [](C& c, std::size_t v) { c.top_k = v; });
  auto* report = app.add_subcommand("report", "Consolidated markdown report");
  auto* all = app.add_subcommand("run", "Every stage in order");
  ov.add<std::size_t>(all, "--n", "Synthetic corpus size", [](C& c, std::size_t v) { c.synth_n = v; });
  ov.add<std::uint64_t>(all, "--seed", "Seed for every stage", [](C& c, std::uint64_t v) {
    c.synth_seed = c.split_seed = c.embed_seed = c.cluster_seed = c.assign_seed = c.boost.seed = v;
  });
  ov.add<std::string>(all, "--findings", "Findings file to ingest instead of synthesizing",
                      [](C& c, const std::string& v) { c.findings = v; });
  auto* show = app.add_subcommand("config", "Print the effective configuration");
  (void)eval;
  (void)report;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg.apply(valfind::config::Document::load(config_path));
    for (auto& f : ov.apply) f(cfg);
    if (show->parsed()) {
      cfg.validate();
      std::cout << cfg.to_toml();
      return kOk;
    }
    if (all->parsed()) {
      valfind::pipeline::run_all(cfg, std::cerr);
      return kOk;
    }
    for (auto* sub : app.get_subcommands()) {
      valfind::pipeline::run_stage(cfg, sub->get_name(), std::cerr);
    }
    return kOk;
  } catch (const valfind::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const valfind::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const valfind::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
