#pragma once

#include "sentshift/audit.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sentshift::report {

enum class Metric { t_p, chi2_p, wd };
std::string_view to_string(Metric m);

/// Heatmap-ready grid: rows are "l1-l2-model", columns "<label>_<comparison>".
/// Absent cells are nullopt and serialize as NA (CSV) or null (JSON).
struct HeatmapMatrix {
  std::string corpus;
  Metric metric = Metric::wd;
  std::vector<std::string> row_keys;
  std::vector<std::string> col_keys;
  std::vector<std::vector<std::optional<double>>> values;
};

class ReportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string path;
  std::string sha256;
};

/// Every corpus that has cells or failures, in name order.
std::vector<std::string> corpora_of(const audit::AuditReport &report);

/// Rows sorted by (l1, l2) and then by the report's model order.
std::vector<audit::PairKey> ordered_pairs(const audit::AuditReport &report, const std::string &corpus);

HeatmapMatrix build_matrix(const audit::AuditReport &report, const std::string &corpus, Metric metric);

/// Shift encoding per pair and "<label>_<tr|b>": 2 gained, 1 lost, 0 none.
HeatmapMatrix build_shift_matrix(const audit::AuditReport &report, const std::string &corpus);

/// Writes matrices, cell/verdict/BLEU tables, report.json and summary.txt, then
/// manifest.json listing every file with its SHA-256.
std::vector<ManifestEntry> emit_matrices(const audit::AuditReport &report, const std::filesystem::path &out_dir);

std::string summary(const audit::AuditReport &report);

nlohmann::ordered_json to_json(const audit::AuditReport &report);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

std::string csv_escape(std::string_view field);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

} // namespace sentshift::report
