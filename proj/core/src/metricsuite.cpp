#include "valfind/metricsuite.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "valfind/csv.hpp"
#include "valfind/error.hpp"
#include "valfind/numfmt.hpp"

namespace valfind::metricsuite {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (const auto& row : counts) {
    for (auto v : row) s += v;
  }
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) s += counts[i][i];
  return s;
}

namespace {

ConfusionMatrix empty_matrix(std::vector<std::string> labels) {
  std::unordered_map<std::string, int> seen;
  for (const auto& l : labels) {
    if (!seen.emplace(l, 0).second) throw DataError("duplicate label '" + l + "' in label order");
  }
  ConfusionMatrix cm;
  cm.counts.assign(labels.size(), std::vector<std::uint64_t>(labels.size(), 0));
  cm.labels = std::move(labels);
  return cm;
}

}  // namespace

ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> predicted,
                          std::vector<std::string> label_order) {
  if (truth.size() != predicted.size()) throw DataError("truth and prediction lengths differ");
  auto cm = empty_matrix(std::move(label_order));
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < cm.labels.size(); ++i) index.emplace(cm.labels[i], i);
  auto find = [&](const std::string& l) {
    auto it = index.find(l);
    if (it == index.end()) throw DataError("unknown label '" + l + "'");
    return it->second;
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[find(truth[i])][find(predicted[i])];
  return cm;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          std::vector<std::string> label_order) {
  if (truth.size() != predicted.size()) throw DataError("truth and prediction lengths differ");
  auto cm = empty_matrix(std::move(label_order));
  const auto n = static_cast<int>(cm.labels.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n || predicted[i] < 0 || predicted[i] >= n) {
      throw DataError("label index out of range");
    }
    ++cm.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return cm;
}

ClassificationReport report(const ConfusionMatrix& cm) {
  const std::size_t L = cm.labels.size();
  ClassificationReport r;
  r.total = cm.total();
  if (r.total == 0) throw DataError("cannot report on an empty confusion matrix");
  std::size_t active = 0;
  for (std::size_t c = 0; c < L; ++c) {
    ClassMetrics m;
    m.label = cm.labels[c];
    m.tp = cm.counts[c][c];
    for (std::size_t o = 0; o < L; ++o) {
      if (o == c) continue;
      m.fn += cm.counts[c][o];
      m.fp += cm.counts[o][c];
    }
    m.tn = r.total - m.tp - m.fn - m.fp;
    m.support = m.tp + m.fn;
    m.no_predictions = m.tp + m.fp == 0;
    m.no_instances = m.support == 0;
    m.precision = m.no_predictions ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    m.recall = m.no_instances ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.support);
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * (m.precision * m.recall) / (m.precision + m.recall)
               : 0.0;
    if (m.support > 0) {
      ++active;
      r.macro.precision += m.precision;
      r.macro.recall += m.recall;
      r.macro.f1 += m.f1;
    }
    const double w = static_cast<double>(m.support);
    r.weighted.precision += w * m.precision;
    r.weighted.recall += w * m.recall;
    r.weighted.f1 += w * m.f1;
    r.classes.push_back(m);
  }
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(r.total);
  const double a = static_cast<double>(active), t = static_cast<double>(r.total);
  r.macro.precision /= a;
  r.macro.recall /= a;
  r.macro.f1 /= a;
  r.macro.support = r.total;
  r.weighted.precision /= t;
  r.weighted.recall /= t;
  r.weighted.f1 /= t;
  r.weighted.support = r.total;
  return r;
}

std::string render_text(const ClassificationReport& r) {
  std::size_t width = std::string("weighted avg").size();
  for (const auto& c : r.classes) width = std::max(width, c.label.size());
  std::ostringstream out;
  auto pad = [](std::string s, std::size_t w, bool left) {
    if (s.size() >= w) return s;
    return left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
  };
  auto num = [&](double v) { return pad(format_fixed(v, 2), 10, false); };
  out << pad("", width, true) << pad("precision", 10, false) << pad("recall", 10, false)
      << pad("f1-score", 10, false) << pad("support", 10, false) << "\n\n";
  for (const auto& c : r.classes) {
    out << pad(c.label, width, true) << num(c.precision) << num(c.recall) << num(c.f1)
        << pad(std::to_string(c.support), 10, false);
    if (c.no_predictions || c.no_instances) out << "  *";
    out << '\n';
  }
  out << '\n'
      << pad("accuracy", width, true) << pad("", 20, false) << num(r.accuracy)
      << pad(std::to_string(r.total), 10, false) << '\n';
  auto avg = [&](const char* name, const Averages& a) {
    out << pad(name, width, true) << num(a.precision) << num(a.recall) << num(a.f1)
        << pad(std::to_string(a.support), 10, false) << '\n';
  };
  avg("macro avg", r.macro);
  avg("weighted avg", r.weighted);
  const bool flagged = std::any_of(r.classes.begin(), r.classes.end(), [](const ClassMetrics& c) {
    return c.no_predictions || c.no_instances;
  });
  if (flagged) out << "\n* zero denominator (no predictions or no instances); reported as 0\n";
  return out.str();
}

std::string render_csv(const ClassificationReport& r) {
  std::ostringstream out;
  csv::write_row(out, {"label", "precision", "recall", "f1", "support"});
  for (const auto& c : r.classes) {
    csv::write_row(out, {c.label, format_double(c.precision), format_double(c.recall),
                         format_double(c.f1), std::to_string(c.support)});
  }
  csv::write_row(out, {"accuracy", "", "", format_double(r.accuracy), std::to_string(r.total)});
  auto avg = [&](const char* name, const Averages& a) {
    csv::write_row(out, {name, format_double(a.precision), format_double(a.recall),
                         format_double(a.f1), std::to_string(a.support)});
  };
  avg("macro avg", r.macro);
  avg("weighted avg", r.weighted);
  return out.str();
}

std::string render_json(const ClassificationReport& r, const ConfusionMatrix& cm) {
  using Json = nlohmann::ordered_json;
  Json j;
  j["labels"] = cm.labels;
  j["confusion"] = cm.counts;
  Json classes = Json::array();
  for (const auto& c : r.classes) {
    classes.push_back({{"label", c.label},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support},
                       {"tp", c.tp},
                       {"fp", c.fp},
                       {"fn", c.fn},
                       {"tn", c.tn},
                       {"no_predictions", c.no_predictions},
                       {"no_instances", c.no_instances}});
  }
  j["classes"] = std::move(classes);
  j["accuracy"] = r.accuracy;
  j["total"] = r.total;
  auto avg = [](const Averages& a) {
    return Json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}, {"support", a.support}};
  };
  j["macro_avg"] = avg(r.macro);
  j["weighted_avg"] = avg(r.weighted);
  return j.dump(1) + "\n";
}

}  // namespace valfind::metricsuite
