#include "sentshift/cli.hpp"

#include "sentshift/audit.hpp"
#include "sentshift/bleu.hpp"
#include "sentshift/cache.hpp"
#include "sentshift/config.hpp"
#include "sentshift/corpus.hpp"
#include "sentshift/process.hpp"
#include "sentshift/report.hpp"
#include "sentshift/stats.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace sentshift::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> read_lines(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return split_lines(ss.str());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

stats::LabelCounts read_counts(const fs::path &path) {
  stats::LabelCounts counts;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty())
      continue;
    const auto split = line.find_first_of(" \t,");
    long long value = 0;
    std::string_view number = split == std::string_view::npos ? std::string_view{} : trim(line.substr(split + 1));
    auto [end, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (split == std::string_view::npos || ec != std::errc() || end != number.data() + number.size() || value < 0)
      throw std::runtime_error(path.string() + ":" + std::to_string(i + 1) + ": expected '<label> <count>'");
    if (!counts.emplace(std::string(line.substr(0, split)), value).second)
      throw std::runtime_error(path.string() + ":" + std::to_string(i + 1) + ": repeated label");
  }
  return counts;
}

std::vector<audit::AuditUnit> plan_units(const RunConfig &config, const std::vector<std::shared_ptr<const ParallelCorpus>> &corpora) {
  ProcessOptions options;
  options.handshake_timeout = config.handshake_timeout;
  options.response_timeout = config.response_timeout;
  options.working_dir = config.base_dir;

  std::vector<audit::AuditUnit> units;
  for (std::size_t c = 0; c < config.corpora.size(); ++c) {
    auto directions = config.corpora[c].directions;
    std::sort(directions.begin(), directions.end());
    for (const auto &[l1, l2] : directions) {
      const ClassifierSpec &classifier = config.classifiers.at(l1.str());
      for (const auto &model : config.models) {
        audit::AuditUnit unit;
        unit.corpus = corpora[c];
        unit.l1 = l1;
        unit.l2 = l2;
        unit.model = model.code;
        unit.labels = classifier.label_set;
        unit.translator = [cmd = model.translate_cmd, options]() -> std::shared_ptr<Adapter> {
          return std::make_shared<ProcessAdapter>(cmd.argv, options, cmd.display);
        };
        unit.classifier = [cmd = classifier.classify_cmd, options]() -> std::shared_ptr<Adapter> {
          return std::make_shared<ProcessAdapter>(cmd.argv, options, cmd.display);
        };
        units.push_back(std::move(unit));
      }
    }
  }
  return units;
}

} // namespace

int cmd_validate(const fs::path &config_path, std::ostream &out, std::ostream &err) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError &e) {
    for (const auto &d : e.diagnostics())
      err << "error: " << d << "\n";
    return kExitFatal;
  }
  std::vector<std::string> diagnostics = referential_diagnostics(config);
  for (auto &d : handshake_diagnostics(config))
    diagnostics.push_back(std::move(d));
  for (const auto &d : diagnostics)
    err << "error: " << d << "\n";
  if (!diagnostics.empty())
    return kExitFatal;
  out << "ok: " << config.corpora.size() << " corpora, " << config.models.size() << " models, "
      << config.classifiers.size() << " classifiers\n";
  return kExitOk;
}

int cmd_run(const fs::path &config_path, const RunOptions &options, std::ostream &out, std::ostream &err) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError &e) {
    for (const auto &d : e.diagnostics())
      err << "error: " << d << "\n";
    return kExitFatal;
  }
  if (auto diagnostics = referential_diagnostics(config); !diagnostics.empty()) {
    for (const auto &d : diagnostics)
      err << "error: " << d << "\n";
    return kExitFatal;
  }

  try {
    std::vector<std::shared_ptr<const ParallelCorpus>> corpora;
    for (const auto &entry : config.corpora) {
      ParallelCorpus corpus = load_parallel(entry.path_a, entry.path_b, entry.lang_a, entry.lang_b, entry.name);
      if (config.sample && config.sample->n < corpus.size())
        corpus = sample(corpus, config.sample->n, config.sample->seed);
      corpora.push_back(std::make_shared<const ParallelCorpus>(std::move(corpus)));
    }

    fs::path cache_dir = config.out_dir / "cache";
    if (const char *env = std::getenv(kCacheDirEnv); env && *env)
      cache_dir = env;
    ResponseCache cache(cache_dir, options.resume);

    audit::AuditOptions audit_options;
    audit_options.alpha = config.alpha;
    audit_options.tokenize = config.tokenize;
    audit_options.chunk_size = config.batch_size;
    audit_options.cache = &cache;
    audit_options.jobs = std::max(1u, options.jobs);
    audit_options.intermediate_dir = config.out_dir / "intermediate";
    audit_options.config_fingerprint = config.fingerprint;
    for (const auto &m : config.models)
      audit_options.model_order.push_back(m.code);

    const audit::AuditReport report = audit::run_audit(plan_units(config, corpora), audit_options);
    report::emit_matrices(report, config.out_dir);
    out << report::summary(report);
    for (const auto &f : report.failures)
      err << "warning: " << f.key.corpus << " " << f.key.row_label() << " failed: " << f.message << "\n";
    return report.failures.empty() ? kExitOk : kExitPartial;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
}

std::vector<double> read_column(const fs::path &path) {
  std::vector<double> values;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty())
      continue;
    double v = 0.0;
    auto [end, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || end != line.data() + line.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(i + 1) + ": not a number: '" + std::string(line) +
                               "'");
    values.push_back(v);
  }
  return values;
}

int cmd_stats(const StatsArgs &args, std::ostream &out, std::ostream &err) {
  try {
    if (args.subcommand == "wd") {
      out << fmt12(stats::wasserstein_1d(read_column(args.first), read_column(args.second))) << "\n";
    } else if (args.subcommand == "ttest") {
      stats::Alternative alt;
      if (args.alternative == "two-sided")
        alt = stats::Alternative::two_sided;
      else if (args.alternative == "greater")
        alt = stats::Alternative::greater;
      else if (args.alternative == "less")
        alt = stats::Alternative::less;
      else
        throw std::invalid_argument("--alt must be two-sided, greater or less");
      const auto r = stats::paired_t_test(read_column(args.first), read_column(args.second), alt);
      out << "statistic " << fmt12(r.statistic) << "\ndf " << fmt12(r.df) << "\np_value " << fmt12(r.p_value) << "\n";
    } else if (args.subcommand == "chi2") {
      const auto r = stats::chi_square_labels(read_counts(args.first), read_counts(args.second));
      out << "statistic " << fmt12(r.statistic) << "\ndf " << fmt12(r.df) << "\np_value " << fmt12(r.p_value) << "\n";
    } else if (args.subcommand == "pearson") {
      const auto x = read_column(args.first);
      const auto y = read_column(args.second);
      if (args.fit) {
        const auto fit = stats::ols_fit(x, y);
        out << "slope " << fmt12(fit.slope) << "\nintercept " << fmt12(fit.intercept) << "\nr " << fmt12(fit.r)
            << "\n";
      } else {
        out << fmt12(stats::pearson_r(x, y)) << "\n";
      }
    } else if (args.subcommand == "bleu") {
      const auto mode = bleu::parse_mode(args.tokenize);
      std::vector<bleu::TokenizedSentence> hyp;
      std::vector<bleu::TokenizedSentence> ref;
      for (const auto &l : read_lines(args.first))
        hyp.push_back(bleu::tokenize(l, mode));
      for (const auto &l : read_lines(args.second))
        ref.push_back(bleu::tokenize(l, mode));
      out << fmt12(bleu::corpus_bleu(hyp, ref)) << "\n";
    } else {
      throw std::invalid_argument("unknown stats subcommand '" + args.subcommand + "'");
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitOk;
}

} // namespace sentshift::cli
