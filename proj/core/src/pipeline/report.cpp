#include <functional>
#include <sstream>

#include "pipeline/artifacts.hpp"
#include "valfind/csv.hpp"
#include "valfind/error.hpp"
#include "valfind/numfmt.hpp"
#include "valfind/pipeline.hpp"

namespace valfind::pipeline {

using namespace detail;

namespace {

using CellFormat = std::function<std::string(const std::string&)>;

std::string percent(const std::string& cell) {
  if (cell == "NA" || cell.empty()) return cell;
  return format_fixed(100.0 * parse_double(cell), 1);
}

std::string fixed3(const std::string& cell) {
  if (cell == "NA" || cell.empty()) return cell;
  return format_fixed(parse_double(cell), 3);
}

std::string verbatim(const std::string& cell) { return cell; }

// First column is kept as-is; the others pass through fmt.
std::string csv_to_markdown(const fs::path& path, const CellFormat& fmt) {
  std::istringstream in(read_file(path));
  const auto records = csv::parse(in);
  if (records.empty()) return "_empty_\n";
  std::ostringstream out;
  auto row = [&](const csv::Row& r, bool header) {
    out << '|';
    for (std::size_t j = 0; j < r.size(); ++j) {
      out << ' ' << (header || j == 0 ? r[j] : fmt(r[j])) << " |";
    }
    out << '\n';
  };
  row(records[0].fields, true);
  out << '|';
  for (std::size_t j = 0; j < records[0].fields.size(); ++j) out << "---|";
  out << '\n';
  for (std::size_t i = 1; i < records.size(); ++i) row(records[i].fields, false);
  return out.str();
}

std::string missing(const std::string& stage) {
  return "_stage missing: run `valfind " + stage + "`_\n";
}

void section_table(std::ostringstream& out, const fs::path& dir, const std::string& file,
                   const std::string& title, const std::string& stage, const CellFormat& fmt) {
  out << "### " << title << "\n\n";
  if (fs::exists(dir / file)) {
    try {
      out << csv_to_markdown(dir / file, fmt);
    } catch (const Error& e) {
      out << "_unreadable artifact " << file << ": " << e.what() << "_\n";
    }
  } else {
    out << missing(stage);
  }
  out << '\n';
}

}  // namespace

std::string render_report(const fs::path& dir) {
  std::ostringstream out;
  out << "# Validation findings experiment report\n\n";
  if (fs::exists(dir / kFindings)) {
    std::size_t n = 0;
    std::istringstream in(read_file(dir / kFindings));
    std::string line;
    while (std::getline(in, line)) n += line.empty() ? 0 : 1;
    out << "Corpus: " << n << " findings.\n\n";
  } else {
    out << "Corpus: " << missing("synth");
    out << '\n';
  }

  out << "## Clustering sweep\n\n";
  section_table(out, dir, kSweepSilhouette, "Mean silhouette (rows k, columns algorithm)", "sweep",
                fixed3);
  section_table(out, dir, kSweepAccuracy, "Total accuracy, majority assignment (%)", "sweep", percent);
  section_table(out, dir, kSweepAccuracyShare, "Total accuracy, share assignment (expected, %)",
                "sweep", percent);

  out << "## Per-label accuracy, majority assignment\n\n";
  section_table(out, dir, assign_file("majority"), "Accuracy by label (%)", "assign --method majority",
                percent);

  out << "## Per-label accuracy, share assignment\n\n";
  section_table(out, dir, assign_file("share"), "Expected accuracy by label (%)",
                "assign --method share", percent);
  if (fs::exists(dir / assign_file("sampled"))) {
    section_table(out, dir, assign_file("sampled"), "Accuracy of one seeded draw by label (%)",
                  "assign --method sampled", percent);
  }

  out << "## Token rankings\n\n";
  if (fs::exists(dir / kRankingsMd)) {
    out << read_file(dir / kRankingsMd) << '\n';
  } else {
    out << missing("attribute") << '\n';
  }

  out << "## Classification reports\n\n";
  bool any_model = false;
  for (const auto& model : kModelNames) {
    for (const auto& subset : kSubsets) {
      const auto file = report_file(model, subset, "txt");
      if (!fs::exists(dir / file)) continue;
      any_model = true;
      out << "### " << model << ", " << subset << " split\n\n```\n" << read_file(dir / file) << "```\n\n";
    }
  }
  if (!any_model) out << missing("eval") << '\n';
  if (fs::exists(dir / kTuneResults)) {
    section_table(out, dir, kTuneResults, "Tuning grid (validation accuracy)", "tune", verbatim);
  }

  out << "## Attribution by feature block\n\n";
  section_table(out, dir, kBlockSummary,
                "Mean per-instance sum of |contribution| (path attribution, test split)", "attribute",
                [](const std::string& c) { return c; });
  return out.str();
}

}  // namespace valfind::pipeline
