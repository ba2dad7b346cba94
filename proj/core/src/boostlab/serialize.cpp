#include <fstream>
#include <sstream>

#include <json.hpp>

#include "valfind/boostlab.hpp"
#include "valfind/error.hpp"

namespace valfind::boostlab {

using Json = nlohmann::ordered_json;

namespace {

Json tree_json(const RegressionTree& t) {
  Json nodes = Json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back(Json::array({n.feature, n.threshold, n.left, n.right, n.weight, n.gain,
                                 n.sum_grad, n.sum_hess, n.count}));
  }
  return nodes;
}

RegressionTree tree_from(const Json& j) {
  RegressionTree t;
  for (const auto& a : j) {
    if (!a.is_array() || a.size() != 9) throw DataError("malformed tree node");
    TreeNode n;
    n.feature = a[0].get<int>();
    n.threshold = a[1].get<double>();
    n.left = a[2].get<int>();
    n.right = a[3].get<int>();
    n.weight = a[4].get<double>();
    n.gain = a[5].get<double>();
    n.sum_grad = a[6].get<double>();
    n.sum_hess = a[7].get<double>();
    n.count = a[8].get<std::size_t>();
    t.nodes.push_back(n);
  }
  const auto size = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
      throw DataError("tree node points outside the tree");
    }
  }
  if (t.nodes.empty()) throw DataError("empty tree");
  return t;
}

Json parse(std::string_view text, const char* kind) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataError(std::string("invalid ") + kind + " model document: " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kind) {
    throw DataError(std::string("not a ") + kind + " model document");
  }
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text << '\n';
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed ") + what + " model: " + e.what());
  }
}

}  // namespace

std::string to_json(const BoostedModel& m) {
  Json j;
  j["format"] = "valfind-boost";
  j["version"] = 1;
  j["classes"] = m.classes;
  j["feature_count"] = m.feature_count;
  j["params"] = {{"rounds", m.params.rounds},
                 {"eta", m.params.eta},
                 {"lambda", m.params.lambda},
                 {"gamma", m.params.gamma},
                 {"max_depth", m.params.max_depth},
                 {"min_child_hessian", m.params.min_child_hessian},
                 {"seed", m.params.seed},
                 {"verify_objective", m.params.verify_objective}};
  j["base_score"] = m.base_score;
  j["objective_trace"] = m.objective_trace;
  Json trees = Json::array();
  for (const auto& per_class : m.trees) {
    Json list = Json::array();
    for (const auto& t : per_class) list.push_back(tree_json(t));
    trees.push_back(std::move(list));
  }
  j["trees"] = std::move(trees);
  j["node_fields"] = {"feature", "threshold", "left", "right", "weight",
                      "gain",    "sum_grad",  "sum_hess", "count"};
  return j.dump(1);
}

BoostedModel boosted_from_json(std::string_view text) {
  const Json j = parse(text, "valfind-boost");
  return guarded("boosted", [&] {
    BoostedModel m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.feature_count = j.at("feature_count").get<std::size_t>();
    const auto& p = j.at("params");
    m.params.rounds = p.at("rounds").get<int>();
    m.params.eta = p.at("eta").get<double>();
    m.params.lambda = p.at("lambda").get<double>();
    m.params.gamma = p.at("gamma").get<double>();
    m.params.max_depth = p.at("max_depth").get<int>();
    m.params.min_child_hessian = p.at("min_child_hessian").get<double>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.params.verify_objective = p.at("verify_objective").get<bool>();
    m.base_score = j.at("base_score").get<std::vector<double>>();
    m.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    for (const auto& per_class : j.at("trees")) {
      std::vector<RegressionTree> list;
      for (const auto& t : per_class) list.push_back(tree_from(t));
      m.trees.push_back(std::move(list));
    }
    if (m.base_score.size() != m.classes.size() || m.trees.size() != m.classes.size()) {
      throw DataError("boosted model class count disagrees with its trees or base scores");
    }
    for (const auto& per_class : m.trees) {
      if (per_class.size() != m.trees.front().size()) throw DataError("ragged tree lists");
      for (const auto& t : per_class) {
        for (const auto& n : t.nodes) {
          if (n.feature >= static_cast<int>(m.feature_count)) {
            throw DataError("tree splits on a feature beyond feature_count");
          }
        }
      }
    }
    return m;
  });
}

std::string to_json(const LogRegModel& m) {
  Json j;
  j["format"] = "valfind-logreg";
  j["version"] = 1;
  j["classes"] = m.classes;
  j["feature_count"] = m.feature_count;
  j["params"] = {{"l2", m.params.l2}, {"epochs", m.params.epochs}, {"step", m.params.step}};
  j["epochs_run"] = m.epochs_run;
  j["kept"] = m.kept;
  j["mean"] = m.mean;
  j["stdev"] = m.stdev;
  Json w = Json::array();
  for (std::size_t c = 0; c < m.weights.rows(); ++c) {
    const auto row = m.weights.row(c);
    w.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["weights"] = std::move(w);
  j["intercept"] = m.intercept;
  return j.dump(1);
}

LogRegModel logreg_from_json(std::string_view text) {
  const Json j = parse(text, "valfind-logreg");
  return guarded("logistic", [&] {
    LogRegModel m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.feature_count = j.at("feature_count").get<std::size_t>();
    m.params.l2 = j.at("params").at("l2").get<double>();
    m.params.epochs = j.at("params").at("epochs").get<int>();
    m.params.step = j.at("params").at("step").get<double>();
    m.epochs_run = j.at("epochs_run").get<int>();
    m.kept = j.at("kept").get<std::vector<std::size_t>>();
    m.mean = j.at("mean").get<std::vector<double>>();
    m.stdev = j.at("stdev").get<std::vector<double>>();
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    m.weights = Matrix(rows.size(), m.kept.size());
    for (std::size_t c = 0; c < rows.size(); ++c) {
      if (rows[c].size() != m.kept.size()) throw DataError("weight row length mismatch");
      std::copy(rows[c].begin(), rows[c].end(), m.weights.row(c).begin());
    }
    m.intercept = j.at("intercept").get<std::vector<double>>();
    if (m.mean.size() != m.kept.size() || m.stdev.size() != m.kept.size() ||
        rows.size() != m.classes.size() || m.intercept.size() != m.classes.size()) {
      throw DataError("logistic model arrays disagree in length");
    }
    for (auto f : m.kept) {
      if (f >= m.feature_count) throw DataError("kept feature beyond feature_count");
    }
    return m;
  });
}

void save_model(const std::filesystem::path& path, const BoostedModel& m) {
  write_text(path, to_json(m));
}
void save_model(const std::filesystem::path& path, const LogRegModel& m) {
  write_text(path, to_json(m));
}
BoostedModel load_boosted(const std::filesystem::path& path) {
  return boosted_from_json(read_text(path));
}
LogRegModel load_logreg(const std::filesystem::path& path) {
  return logreg_from_json(read_text(path));
}

}  // namespace valfind::boostlab
