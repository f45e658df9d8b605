#include "sentshift/audit.hpp"

#include "sentshift/stats.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

namespace sentshift::audit {

namespace fs = std::filesystem;

std::string_view to_string(VersionKind v) {
  switch (v) {
  case VersionKind::original:
    return "original";
  case VersionKind::translation:
    return "translation";
  case VersionKind::back_translation:
    return "back_translation";
  }
  return "?";
}

std::string_view to_string(ComparisonKind c) {
  switch (c) {
  case ComparisonKind::tr:
    return "tr";
  case ComparisonKind::b:
    return "b";
  case ComparisonKind::trb:
    return "trb";
  }
  return "?";
}

std::string_view to_string(Direction d) {
  switch (d) {
  case Direction::up:
    return "up";
  case Direction::down:
    return "down";
  case Direction::none:
    return "none";
  }
  return "?";
}

std::string_view to_string(ShiftStatus s) {
  switch (s) {
  case ShiftStatus::directed_shift:
    return "directed_shift";
  case ShiftStatus::no_shift:
    return "no_shift";
  case ShiftStatus::inconclusive:
    return "inconclusive";
  }
  return "?";
}

ComparisonKind parse_comparison(std::string_view s) {
  if (s == "tr")
    return ComparisonKind::tr;
  if (s == "b")
    return ComparisonKind::b;
  if (s == "trb")
    return ComparisonKind::trb;
  throw std::invalid_argument("unknown comparison '" + std::string(s) + "'");
}

std::pair<VersionKind, VersionKind> versions_of(ComparisonKind c) {
  switch (c) {
  case ComparisonKind::tr:
    return {VersionKind::original, VersionKind::translation};
  case ComparisonKind::b:
    return {VersionKind::original, VersionKind::back_translation};
  case ComparisonKind::trb:
    return {VersionKind::translation, VersionKind::back_translation};
  }
  throw std::logic_error("bad comparison kind");
}

std::string PairKey::row_label() const {
  std::string label = l1.str() + "-" + l2.str();
  if (!model.empty())
    label += "-" + model;
  return label;
}

std::vector<double> ScoredVersions::column(VersionKind v, std::size_t label) const {
  const auto &rows = scores[static_cast<int>(v)];
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto &probs : rows)
    out.push_back(probs[label]);
  return out;
}

std::vector<std::size_t> ScoredVersions::argmax(VersionKind v) const {
  std::vector<std::size_t> out;
  for (const auto &probs : scores[static_cast<int>(v)]) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
      if (probs[i] > probs[best])
        best = i;
    out.push_back(best);
  }
  return out;
}

VersionedText build_versions(const ParallelCorpus &corpus, const LanguageCode &l1, const LanguageCode &l2,
                             Adapter &translator, const std::string &model, const BatchOptions &options) {
  const bool l1_is_a = corpus.lang_a == l1 && corpus.lang_b == l2;
  const bool l1_is_b = corpus.lang_b == l1 && corpus.lang_a == l2;
  if (!l1_is_a && !l1_is_b)
    throw AuditError(AuditError::Kind::InvalidPair,
                     "corpus '" + corpus.name + "' does not hold the pair " + l1.str() + "-" + l2.str());

  const std::size_t n = corpus.size();
  auto side_l1 = [&](std::size_t i) -> const std::string & {
    return l1_is_a ? corpus.pairs[i].text_a : corpus.pairs[i].text_b;
  };
  auto side_l2 = [&](std::size_t i) -> const std::string & {
    return l1_is_a ? corpus.pairs[i].text_b : corpus.pairs[i].text_a;
  };

  // c_l1 -> l2
  std::vector<TranslationRequest> forward;
  forward.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    forward.push_back({"f" + std::to_string(i), side_l1(i), l1, l2});
  const TranslationBatch fwd = translate_batch(translator, forward, options);

  // c_l2 -> l1 and t_l2(c_l1) -> l1 share a direction, so they share batches.
  std::vector<TranslationRequest> backward;
  backward.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i)
    backward.push_back({"x" + std::to_string(i), side_l2(i), l2, l1});
  for (std::size_t i = 0; i < n; ++i) {
    auto it = fwd.translations.find("f" + std::to_string(i));
    if (it != fwd.translations.end())
      backward.push_back({"b" + std::to_string(i), it->second, l2, l1});
  }
  const TranslationBatch bwd = translate_batch(translator, backward, options);

  VersionedText out;
  out.key = {corpus.name, l1, l2, model};
  for (std::size_t i = 0; i < n; ++i) {
    const std::string idx = std::to_string(i);
    auto f = fwd.translations.find("f" + idx);
    auto x = bwd.translations.find("x" + idx);
    auto b = bwd.translations.find("b" + idx);
    if (f == fwd.translations.end() || x == bwd.translations.end() || b == bwd.translations.end())
      continue;
    out.kept_indices.push_back(corpus.pairs[i].index);
    out.versions[0].push_back(side_l1(i));
    out.versions[1].push_back(x->second);
    out.versions[2].push_back(b->second);
    out.source_l2.push_back(side_l2(i));
    out.intermediate.push_back(f->second);
  }
  if (out.kept_indices.empty())
    throw AuditError(AuditError::Kind::AllSentencesDropped,
                     "every sentence of " + out.key.row_label() + " failed translation");
  return out;
}

ScoredVersions score_versions(const VersionedText &versioned, Adapter &classifier, const BatchOptions &options) {
  const std::size_t n = versioned.size();
  std::array<ClassificationBatch, 3> batches;
  std::vector<bool> drop(n, false);
  for (int v = 0; v < 3; ++v) {
    std::vector<SentimentRequest> requests;
    requests.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
      requests.push_back({std::to_string(j), versioned.versions[v][j], versioned.key.l1});
    batches[v] = classify_batch(classifier, requests, options);
    for (const auto &[id, _] : batches[v].failures)
      drop[std::stoul(id)] = true;
  }

  ScoredVersions out;
  out.key = versioned.key;
  out.labels = batches[0].label_set;
  for (int v = 0; v < 3; ++v) {
    for (const auto &sv : batches[v].scores) {
      const std::size_t j = std::stoul(sv.id);
      if (!drop[j])
        out.scores[v].push_back(sv.probs);
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    if (!drop[j])
      out.kept_indices.push_back(versioned.kept_indices[j]);
  if (out.kept_indices.empty())
    throw AuditError(AuditError::Kind::AllSentencesDropped,
                     "every sentence of " + versioned.key.row_label() + " failed classification");
  return out;
}

namespace {

stats::LabelCounts argmax_counts(const ScoredVersions &scored, VersionKind v) {
  stats::LabelCounts counts;
  for (const auto &label : scored.labels.labels())
    counts[label] = 0;
  for (std::size_t idx : scored.argmax(v))
    ++counts[scored.labels[idx]];
  return counts;
}

ComparisonKind comparison_for(VersionKind a, VersionKind b) {
  if (a == VersionKind::original && b == VersionKind::translation)
    return ComparisonKind::tr;
  if (a == VersionKind::original && b == VersionKind::back_translation)
    return ComparisonKind::b;
  return ComparisonKind::trb;
}

} // namespace

std::vector<ComparisonCell> compare(const ScoredVersions &scored, VersionKind a, VersionKind b) {
  double chi2_p = 1.0;
  try {
    chi2_p = stats::chi_square_labels(argmax_counts(scored, a), argmax_counts(scored, b)).p_value;
  } catch (const stats::StatsError &e) {
    // Fewer than two labels observed: both versions put every sentence on the
    // same label, so the label distributions coincide.
    if (e.kind() != stats::StatsError::Kind::DegenerateTable)
      throw;
  }

  std::vector<ComparisonCell> cells;
  cells.reserve(scored.labels.size());
  for (std::size_t l = 0; l < scored.labels.size(); ++l) {
    const auto xa = scored.column(a, l);
    const auto xb = scored.column(b, l);
    ComparisonCell cell;
    cell.key = scored.key;
    cell.comparison = comparison_for(a, b);
    cell.label = scored.labels[l];
    cell.wd = stats::wasserstein_1d(xa, xb);
    cell.t_p = stats::paired_t_test(xa, xb, stats::Alternative::two_sided).p_value;
    cell.chi2_p = chi2_p;
    cell.n = xa.size();
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::vector<ComparisonCell> compare(const VersionedText &versioned, VersionKind a, VersionKind b, Adapter &classifier,
                                    const BatchOptions &options) {
  return compare(score_versions(versioned, classifier, options), a, b);
}

DirectionMap directional_scan(const ScoredVersions &scored, VersionKind a, VersionKind b, double alpha) {
  DirectionMap out;
  for (std::size_t l = 0; l < scored.labels.size(); ++l) {
    const auto xa = scored.column(a, l);
    const auto xb = scored.column(b, l);
    const bool up = stats::paired_t_test(xb, xa, stats::Alternative::greater).p_value < alpha;
    const bool down = stats::paired_t_test(xb, xa, stats::Alternative::less).p_value < alpha;
    Direction d = Direction::none;
    if (up && !down)
      d = Direction::up;
    else if (down && !up)
      d = Direction::down;
    out.emplace_back(scored.labels[l], d);
  }
  return out;
}

DirectionMap directional_scan(const VersionedText &versioned, VersionKind a, VersionKind b, Adapter &classifier,
                              double alpha, const BatchOptions &options) {
  return directional_scan(score_versions(versioned, classifier, options), a, b, alpha);
}

ShiftOutcome shift_filter(const DirectionMap &directions) {
  if (directions.size() < 2)
    throw std::invalid_argument("shift_filter needs at least two labels");
  std::vector<std::string> up;
  std::vector<std::string> down;
  for (const auto &[label, d] : directions) {
    if (d == Direction::up)
      up.push_back(label);
    else if (d == Direction::down)
      down.push_back(label);
  }
  ShiftOutcome out;
  if (!up.empty() && !down.empty()) {
    out.status = ShiftStatus::directed_shift;
    out.gained = std::move(up);
    out.lost = std::move(down);
  } else if (up.empty() && down.empty()) {
    out.status = ShiftStatus::no_shift;
  } else {
    out.status = ShiftStatus::inconclusive;
  }
  return out;
}

namespace {

std::optional<double> safe_pearson(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() < 2)
    return std::nullopt;
  try {
    return stats::pearson_r(x, y);
  } catch (const stats::StatsError &e) {
    if (e.kind() == stats::StatsError::Kind::ZeroVariance)
      return std::nullopt;
    throw;
  }
}

} // namespace

Correlations correlation_analysis(const std::vector<ComparisonCell> &cells, const std::map<PairKey, BleuScores> &bleu) {
  std::vector<double> wd;
  std::vector<double> tp;
  std::vector<double> cp;
  std::map<PairKey, std::pair<double, std::size_t>> per_pair;
  for (const auto &c : cells) {
    wd.push_back(c.wd);
    tp.push_back(c.t_p);
    cp.push_back(c.chi2_p);
    auto &acc = per_pair[c.key];
    acc.first += c.wd;
    acc.second += 1;
  }
  Correlations out;
  out.r_wd_tp = safe_pearson(wd, tp);
  out.r_wd_chi2p = safe_pearson(wd, cp);

  std::vector<double> mean_wd;
  std::vector<double> scores;
  for (const auto &[key, acc] : per_pair) {
    auto it = bleu.find(key);
    if (it == bleu.end() || !it->second.l2_to_l1)
      continue;
    mean_wd.push_back(acc.first / static_cast<double>(acc.second));
    scores.push_back(*it->second.l2_to_l1);
  }
  out.r_wd_bleu = safe_pearson(mean_wd, scores);
  return out;
}

BleuScores score_bleu(const VersionedText &versioned, bleu::TokenizeMode mode) {
  auto tokenize_all = [mode](const std::vector<std::string> &texts) {
    std::vector<bleu::TokenizedSentence> out;
    out.reserve(texts.size());
    for (const auto &t : texts)
      out.push_back(bleu::tokenize(t, mode));
    return out;
  };
  auto safe = [](const auto &hyp, const auto &ref) -> std::optional<double> {
    try {
      return bleu::corpus_bleu(hyp, ref);
    } catch (const bleu::BleuError &) {
      return std::nullopt;
    }
  };
  BleuScores out;
  out.l2_to_l1 = safe(tokenize_all(versioned.version(VersionKind::translation)),
                      tokenize_all(versioned.version(VersionKind::original)));
  out.l1_to_l2 = safe(tokenize_all(versioned.intermediate), tokenize_all(versioned.source_l2));
  return out;
}

namespace {

struct UnitResult {
  std::vector<ComparisonCell> cells;
  std::vector<ShiftVerdict> verdicts;
  BleuScores bleu;
  LabelSet labels;
  std::optional<std::string> failure;
};

void write_intermediates(const fs::path &root, const VersionedText &versioned, const ScoredVersions &scored) {
  const fs::path dir = root / versioned.key.corpus / versioned.key.row_label();
  fs::create_directories(dir);
  for (int v = 0; v < 3; ++v) {
    const std::string name(to_string(static_cast<VersionKind>(v)));
    std::ofstream texts(dir / (name + ".jsonl"), std::ios::binary | std::ios::trunc);
    for (std::size_t j = 0; j < versioned.size(); ++j) {
      nlohmann::ordered_json row = {{"index", versioned.kept_indices[j]}, {"text", versioned.versions[v][j]}};
      texts << row.dump() << '\n';
    }
    std::ofstream scores(dir / (name + ".scores.jsonl"), std::ios::binary | std::ios::trunc);
    for (std::size_t j = 0; j < scored.size(); ++j) {
      nlohmann::ordered_json s = nlohmann::ordered_json::object();
      for (std::size_t l = 0; l < scored.labels.size(); ++l)
        s[scored.labels[l]] = scored.scores[v][j][l];
      nlohmann::ordered_json row = {{"index", scored.kept_indices[j]}, {"scores", s}};
      scores << row.dump() << '\n';
    }
  }
}

UnitResult run_unit(const AuditUnit &unit, const AuditOptions &options) {
  UnitResult result;
  result.labels = unit.labels;
  BatchOptions batch;
  batch.chunk_size = options.chunk_size;
  batch.cache = options.cache;

  std::shared_ptr<Adapter> translator = unit.translator();
  const VersionedText versioned = build_versions(*unit.corpus, unit.l1, unit.l2, *translator, unit.model, batch);
  translator.reset();

  batch.label_set = unit.labels;
  std::shared_ptr<Adapter> classifier = unit.classifier();
  const ScoredVersions scored = score_versions(versioned, *classifier, batch);
  classifier.reset();

  if (options.intermediate_dir)
    write_intermediates(*options.intermediate_dir, versioned, scored);

  for (ComparisonKind kind : {ComparisonKind::tr, ComparisonKind::b, ComparisonKind::trb}) {
    const auto [a, b] = versions_of(kind);
    auto cells = compare(scored, a, b);
    result.cells.insert(result.cells.end(), cells.begin(), cells.end());
  }
  for (ComparisonKind kind : {ComparisonKind::tr, ComparisonKind::b}) {
    const auto [a, b] = versions_of(kind);
    ShiftOutcome outcome = shift_filter(directional_scan(scored, a, b, options.alpha));
    result.verdicts.push_back({versioned.key, kind, std::move(outcome.gained), std::move(outcome.lost), outcome.status});
  }
  result.bleu = score_bleu(versioned, options.tokenize);
  return result;
}

} // namespace

AuditReport run_audit(const std::vector<AuditUnit> &units, const AuditOptions &options) {
  std::vector<UnitResult> results(units.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < units.size(); i = next++) {
      try {
        results[i] = run_unit(units[i], options);
      } catch (const std::exception &e) {
        results[i] = UnitResult{};
        results[i].failure = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(units.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j)
      pool.emplace_back(worker);
  }

  AuditReport report;
  report.alpha = options.alpha;
  report.config_fingerprint = options.config_fingerprint;
  report.model_order = options.model_order;
  std::set<std::string> corpora;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const AuditUnit &unit = units[i];
    const PairKey key{unit.corpus->name, unit.l1, unit.l2, unit.model};
    corpora.insert(key.corpus);
    if (results[i].failure) {
      report.failures.push_back({key, *results[i].failure});
      continue;
    }
    report.cells.insert(report.cells.end(), results[i].cells.begin(), results[i].cells.end());
    report.verdicts.insert(report.verdicts.end(), results[i].verdicts.begin(), results[i].verdicts.end());
    report.bleu[key] = results[i].bleu;
    report.label_sets[key] = results[i].labels;
  }

  report.correlations = correlation_analysis(report.cells, report.bleu);
  for (const auto &corpus : corpora) {
    std::vector<ComparisonCell> subset;
    std::copy_if(report.cells.begin(), report.cells.end(), std::back_inserter(subset),
                 [&](const ComparisonCell &c) { return c.key.corpus == corpus; });
    report.corpus_correlations[corpus] = correlation_analysis(subset, report.bleu);
  }
  return report;
}

} // namespace sentshift::audit
