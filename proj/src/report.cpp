#include "sentshift/report.hpp"

#include "sentshift/hash.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sentshift::report {

namespace fs = std::filesystem;
using audit::AuditReport;
using audit::ComparisonCell;
using audit::ComparisonKind;
using audit::PairKey;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Metric m) {
  switch (m) {
  case Metric::t_p:
    return "t_p";
  case Metric::chi2_p:
    return "chi2_p";
  case Metric::wd:
    return "wd";
  }
  return "?";
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc())
    throw ReportError("cannot format number");
  return std::string(buf, end);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool pending = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      pending = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      pending = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
        ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      pending = false;
    } else {
      field += c;
      pending = true;
    }
  }
  if (pending || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> corpora_of(const AuditReport &report) {
  std::set<std::string> names;
  for (const auto &c : report.cells)
    names.insert(c.key.corpus);
  for (const auto &f : report.failures)
    names.insert(f.key.corpus);
  return {names.begin(), names.end()};
}

namespace {

std::size_t model_rank(const AuditReport &report, const std::string &model) {
  auto it = std::find(report.model_order.begin(), report.model_order.end(), model);
  return static_cast<std::size_t>(it - report.model_order.begin());
}

std::string column_key(const std::string &label, ComparisonKind c) {
  return label + "_" + std::string(audit::to_string(c));
}

/// Labels in first-seen order over the ordered rows, each row in LabelSet order.
std::vector<std::string> label_columns(const AuditReport &report, const std::vector<PairKey> &rows) {
  std::vector<std::string> labels;
  for (const auto &key : rows) {
    auto it = report.label_sets.find(key);
    if (it == report.label_sets.end())
      continue;
    for (const auto &l : it->second.labels())
      if (std::find(labels.begin(), labels.end(), l) == labels.end())
        labels.push_back(l);
  }
  return labels;
}

double metric_of(const ComparisonCell &c, Metric m) {
  switch (m) {
  case Metric::t_p:
    return c.t_p;
  case Metric::chi2_p:
    return c.chi2_p;
  case Metric::wd:
    return c.wd;
  }
  return 0.0;
}

std::string cell_text(const std::optional<double> &v) { return v ? format_number(*v) : "NA"; }

ojson json_value(const std::optional<double> &v) { return v ? ojson(*v) : ojson(nullptr); }

std::string matrix_csv(const HeatmapMatrix &m) {
  std::ostringstream out;
  out << "pair";
  for (const auto &c : m.col_keys)
    out << ',' << csv_escape(c);
  out << '\n';
  for (std::size_t r = 0; r < m.row_keys.size(); ++r) {
    out << csv_escape(m.row_keys[r]);
    for (const auto &v : m.values[r])
      out << ',' << cell_text(v);
    out << '\n';
  }
  return out.str();
}

ojson matrix_json(const HeatmapMatrix &m, std::string_view metric_name) {
  ojson values = ojson::array();
  for (const auto &row : m.values) {
    ojson r = ojson::array();
    for (const auto &v : row)
      r.push_back(json_value(v));
    values.push_back(r);
  }
  return ojson{{"corpus", m.corpus}, {"metric", metric_name}, {"rows", m.row_keys}, {"columns", m.col_keys},
               {"values", values}};
}

std::string join(const std::vector<std::string> &items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i)
      out += sep;
    out += items[i];
  }
  return out;
}

ojson correlations_json(const audit::Correlations &c) {
  return ojson{{"r_wd_tp", json_value(c.r_wd_tp)},
               {"r_wd_chi2p", json_value(c.r_wd_chi2p)},
               {"r_wd_bleu", json_value(c.r_wd_bleu)}};
}

std::string short_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string short_optional(const std::optional<double> &v) { return v ? short_number(*v) : "undefined"; }

} // namespace

std::vector<PairKey> ordered_pairs(const AuditReport &report, const std::string &corpus) {
  std::set<PairKey> keys;
  for (const auto &c : report.cells)
    if (c.key.corpus == corpus)
      keys.insert(c.key);
  std::vector<PairKey> rows(keys.begin(), keys.end());
  std::sort(rows.begin(), rows.end(), [&](const PairKey &a, const PairKey &b) {
    return std::tuple(a.l1, a.l2, model_rank(report, a.model), a.model) <
           std::tuple(b.l1, b.l2, model_rank(report, b.model), b.model);
  });
  return rows;
}

HeatmapMatrix build_matrix(const AuditReport &report, const std::string &corpus, Metric metric) {
  HeatmapMatrix m;
  m.corpus = corpus;
  m.metric = metric;
  const auto rows = ordered_pairs(report, corpus);
  const auto labels = label_columns(report, rows);
  for (const auto &l : labels)
    for (ComparisonKind c : {ComparisonKind::tr, ComparisonKind::b, ComparisonKind::trb})
      m.col_keys.push_back(column_key(l, c));

  std::map<std::pair<PairKey, std::string>, const ComparisonCell *> index;
  for (const auto &c : report.cells) {
    if (c.key.corpus != corpus)
      continue;
    auto [_, inserted] = index.emplace(std::make_pair(c.key, column_key(c.label, c.comparison)), &c);
    if (!inserted)
      throw ReportError("duplicate cell for " + c.key.row_label() + " " + column_key(c.label, c.comparison));
  }
  for (const auto &key : rows) {
    m.row_keys.push_back(key.row_label());
    std::vector<std::optional<double>> row;
    for (const auto &col : m.col_keys) {
      auto it = index.find({key, col});
      row.push_back(it == index.end() ? std::nullopt : std::optional<double>(metric_of(*it->second, metric)));
    }
    m.values.push_back(std::move(row));
  }
  return m;
}

HeatmapMatrix build_shift_matrix(const AuditReport &report, const std::string &corpus) {
  HeatmapMatrix m;
  m.corpus = corpus;
  const auto rows = ordered_pairs(report, corpus);
  const auto labels = label_columns(report, rows);
  for (const auto &l : labels)
    for (ComparisonKind c : {ComparisonKind::tr, ComparisonKind::b})
      m.col_keys.push_back(column_key(l, c));
  for (const auto &key : rows) {
    m.row_keys.push_back(key.row_label());
    std::vector<std::optional<double>> row(m.col_keys.size());
    const auto set = report.label_sets.find(key);
    for (std::size_t i = 0; i < m.col_keys.size(); ++i) {
      const std::string &label = labels[i / 2];
      if (set != report.label_sets.end() && set->second.index_of(label))
        row[i] = 0.0;
    }
    for (const auto &v : report.verdicts) {
      if (v.key != key || v.status != audit::ShiftStatus::directed_shift)
        continue;
      for (std::size_t i = 0; i < m.col_keys.size(); ++i) {
        if (m.col_keys[i] != column_key(labels[i / 2], v.comparison))
          continue;
        const std::string &label = labels[i / 2];
        if (std::find(v.gained.begin(), v.gained.end(), label) != v.gained.end())
          row[i] = 2.0;
        else if (std::find(v.lost.begin(), v.lost.end(), label) != v.lost.end())
          row[i] = 1.0;
      }
    }
    m.values.push_back(std::move(row));
  }
  return m;
}

ojson to_json(const AuditReport &report) {
  ojson cells = ojson::array();
  for (const auto &c : report.cells) {
    cells.push_back({{"corpus", c.key.corpus},
                     {"l1", c.key.l1.str()},
                     {"l2", c.key.l2.str()},
                     {"model", c.key.model},
                     {"comparison", audit::to_string(c.comparison)},
                     {"label", c.label},
                     {"wd", c.wd},
                     {"t_p", c.t_p},
                     {"chi2_p", c.chi2_p},
                     {"n", c.n}});
  }
  ojson verdicts = ojson::array();
  for (const auto &v : report.verdicts) {
    verdicts.push_back({{"corpus", v.key.corpus},
                        {"pair", v.key.row_label()},
                        {"l1", v.key.l1.str()},
                        {"l2", v.key.l2.str()},
                        {"model", v.key.model},
                        {"comparison", audit::to_string(v.comparison)},
                        {"status", audit::to_string(v.status)},
                        {"gained", v.gained},
                        {"lost", v.lost}});
  }
  ojson bleu = ojson::array();
  for (const auto &[key, scores] : report.bleu) {
    bleu.push_back({{"corpus", key.corpus},
                    {"pair", key.row_label()},
                    {"bleu_l2_l1", json_value(scores.l2_to_l1)},
                    {"bleu_l1_l2", json_value(scores.l1_to_l2)}});
  }
  ojson per_corpus = ojson::object();
  for (const auto &[corpus, c] : report.corpus_correlations)
    per_corpus[corpus] = correlations_json(c);
  ojson failures = ojson::array();
  for (const auto &f : report.failures)
    failures.push_back({{"corpus", f.key.corpus}, {"pair", f.key.row_label()}, {"message", f.message}});
  return ojson{{"config_fingerprint", report.config_fingerprint},
               {"alpha", report.alpha},
               {"models", report.model_order},
               {"correlations", correlations_json(report.correlations)},
               {"corpus_correlations", per_corpus},
               {"cells", cells},
               {"verdicts", verdicts},
               {"bleu", bleu},
               {"failures", failures}};
}

std::string summary(const AuditReport &report) {
  std::ostringstream out;
  std::size_t directed = 0;
  for (const auto &v : report.verdicts)
    directed += v.status == audit::ShiftStatus::directed_shift;

  out << "sentiment shift audit\n";
  out << "alpha: " << short_number(report.alpha) << "\n";
  out << "config: " << report.config_fingerprint << "\n";
  out << "cells: " << report.cells.size() << ", verdicts: " << report.verdicts.size()
      << ", failed pairs: " << report.failures.size() << "\n";
  out << "directed shifts: " << directed << "\n";

  for (const auto &corpus : corpora_of(report)) {
    std::size_t cells = 0;
    std::size_t t_rejected = 0;
    std::map<std::pair<PairKey, ComparisonKind>, double> groups;
    for (const auto &c : report.cells) {
      if (c.key.corpus != corpus)
        continue;
      ++cells;
      t_rejected += c.t_p < report.alpha;
      groups[{c.key, c.comparison}] = c.chi2_p;
    }
    std::size_t chi_rejected = 0;
    for (const auto &[_, p] : groups)
      chi_rejected += p < report.alpha;

    out << "\ncorpus " << corpus << "\n";
    out << "  t-test rejections: " << t_rejected << " of " << cells << " cells\n";
    out << "  chi2 rejections: " << chi_rejected << " of " << groups.size() << " comparisons\n";
    std::vector<std::string> lines;
    for (const auto &v : report.verdicts) {
      if (v.key.corpus != corpus || v.status != audit::ShiftStatus::directed_shift)
        continue;
      lines.push_back("    " + v.key.row_label() + ": shift → {" + join(v.gained, ", ") + "} from {" +
                      join(v.lost, ", ") + "} (" + std::string(audit::to_string(v.comparison)) + ")");
    }
    out << "  directed shifts: " << lines.size() << "\n";
    for (const auto &l : lines)
      out << l << "\n";
    if (auto it = report.corpus_correlations.find(corpus); it != report.corpus_correlations.end()) {
      out << "  r(wd, t_p) = " << short_optional(it->second.r_wd_tp)
          << ", r(wd, chi2_p) = " << short_optional(it->second.r_wd_chi2p)
          << ", r(wd, bleu) = " << short_optional(it->second.r_wd_bleu) << "\n";
    }
  }

  out << "\noverall correlations\n";
  out << "  r(wd, t_p) = " << short_optional(report.correlations.r_wd_tp) << "\n";
  out << "  r(wd, chi2_p) = " << short_optional(report.correlations.r_wd_chi2p) << "\n";
  out << "  r(wd, bleu) = " << short_optional(report.correlations.r_wd_bleu) << "\n";

  std::map<std::string, std::vector<double>> by_l1;
  for (const auto &[key, scores] : report.bleu)
    if (scores.l2_to_l1)
      by_l1[key.l1.str()].push_back(*scores.l2_to_l1);
  if (!by_l1.empty()) {
    auto mean_of = [](const std::vector<double> &v) {
      double s = 0.0;
      for (double x : v)
        s += x;
      return s / static_cast<double>(v.size());
    };
    out << "\nmean BLEU (l2 -> l1) by l1\n";
    for (const auto &[l1, values] : by_l1) {
      std::vector<double> rest;
      for (const auto &[other, v] : by_l1)
        if (other != l1)
          rest.insert(rest.end(), v.begin(), v.end());
      out << "  " << l1 << ": " << short_number(mean_of(values)) << " over " << values.size() << " pair(s)";
      if (!rest.empty())
        out << "; all other l1: " << short_number(mean_of(rest));
      out << "\n";
    }
  }

  if (!report.failures.empty()) {
    out << "\nfailures\n";
    for (const auto &f : report.failures)
      out << "  " << f.key.corpus << " " << f.key.row_label() << ": " << f.message << "\n";
  }
  return out.str();
}

namespace {

void write_text(const fs::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ReportError("cannot write " + path.string());
  out << content;
  if (!out)
    throw ReportError("write failed for " + path.string());
}

} // namespace

std::vector<ManifestEntry> emit_matrices(const AuditReport &report, const fs::path &out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw ReportError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::pair<std::string, std::string>> files;

  for (const auto &corpus : corpora_of(report)) {
    for (Metric metric : {Metric::t_p, Metric::chi2_p, Metric::wd}) {
      const HeatmapMatrix m = build_matrix(report, corpus, metric);
      const std::string stem = corpus + "." + std::string(to_string(metric));
      files.emplace_back(stem + ".csv", matrix_csv(m));
      files.emplace_back(stem + ".json", matrix_json(m, to_string(metric)).dump(2) + "\n");
    }
    const HeatmapMatrix shifts = build_shift_matrix(report, corpus);
    files.emplace_back(corpus + ".shifts.csv", matrix_csv(shifts));
    files.emplace_back(corpus + ".shifts.json", matrix_json(shifts, "shift").dump(2) + "\n");
  }

  std::ostringstream cells;
  cells << "corpus,pair,l1,l2,model,comparison,label,wd,t_p,chi2_p,n\n";
  for (const auto &c : report.cells) {
    cells << csv_escape(c.key.corpus) << ',' << csv_escape(c.key.row_label()) << ',' << c.key.l1.str() << ','
          << c.key.l2.str() << ',' << csv_escape(c.key.model) << ',' << audit::to_string(c.comparison) << ','
          << csv_escape(c.label) << ',' << format_number(c.wd) << ',' << format_number(c.t_p) << ','
          << format_number(c.chi2_p) << ',' << c.n << '\n';
  }
  files.emplace_back("cells.csv", cells.str());

  std::ostringstream verdicts;
  verdicts << "corpus,pair,comparison,status,gained,lost\n";
  for (const auto &v : report.verdicts) {
    verdicts << csv_escape(v.key.corpus) << ',' << csv_escape(v.key.row_label()) << ','
             << audit::to_string(v.comparison) << ',' << audit::to_string(v.status) << ','
             << csv_escape(join(v.gained, ";")) << ',' << csv_escape(join(v.lost, ";")) << '\n';
  }
  files.emplace_back("verdicts.csv", verdicts.str());

  std::ostringstream bleu;
  bleu << "corpus,pair,l1,l2,model,bleu_l2_l1,bleu_l1_l2\n";
  for (const auto &[key, scores] : report.bleu) {
    bleu << csv_escape(key.corpus) << ',' << csv_escape(key.row_label()) << ',' << key.l1.str() << ','
         << key.l2.str() << ',' << csv_escape(key.model) << ',' << cell_text(scores.l2_to_l1) << ','
         << cell_text(scores.l1_to_l2) << '\n';
  }
  files.emplace_back("bleu.csv", bleu.str());

  files.emplace_back("report.json", to_json(report).dump(2) + "\n");
  files.emplace_back("summary.txt", summary(report));

  std::vector<ManifestEntry> manifest;
  ojson listing = ojson::array();
  for (const auto &[name, content] : files) {
    write_text(out_dir / name, content);
    manifest.push_back({name, sha256_hex(content)});
    listing.push_back({{"path", name}, {"sha256", manifest.back().sha256}});
  }
  write_text(out_dir / "manifest.json", ojson{{"files", listing}}.dump(2) + "\n");
  return manifest;
}

} // namespace sentshift::report
