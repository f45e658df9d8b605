#pragma once

#include "sentshift/adapter.hpp"
#include "sentshift/bleu.hpp"
#include "sentshift/corpus.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sentshift::audit {

enum class VersionKind { original = 0, translation = 1, back_translation = 2 };
enum class ComparisonKind { tr, b, trb };
enum class Direction { up, down, none };
enum class ShiftStatus { directed_shift, no_shift, inconclusive };

std::string_view to_string(VersionKind v);
std::string_view to_string(ComparisonKind c);
std::string_view to_string(Direction d);
std::string_view to_string(ShiftStatus s);
ComparisonKind parse_comparison(std::string_view s);

/// The two versions a comparison kind puts side by side.
std::pair<VersionKind, VersionKind> versions_of(ComparisonKind c);

/// (corpus, l1, l2, model): one translation model applied to one ordered language pair.
struct PairKey {
  std::string corpus;
  LanguageCode l1;
  LanguageCode l2;
  std::string model;

  /// "l1-l2-model", e.g. "de-en-m".
  std::string row_label() const;
  friend auto operator<=>(const PairKey &, const PairKey &) = default;
};

/// c_l1, t_l1(c_l2) and t_l1(t_l2(c_l1)), index-aligned over the sentences that
/// survived every translation step.
struct VersionedText {
  PairKey key;
  std::array<std::vector<std::string>, 3> versions;
  std::vector<std::size_t> kept_indices;
  /// c_l2 and t_l2(c_l1), kept for scoring the l1 -> l2 direction with BLEU.
  std::vector<std::string> source_l2;
  std::vector<std::string> intermediate;

  const std::vector<std::string> &version(VersionKind v) const { return versions[static_cast<int>(v)]; }
  std::size_t size() const { return kept_indices.size(); }
};

/// Per-sentence probability vectors for all three versions. Sentences the
/// classifier failed on in any version are dropped from all of them.
struct ScoredVersions {
  PairKey key;
  LabelSet labels;
  std::array<std::vector<std::vector<double>>, 3> scores;
  std::vector<std::size_t> kept_indices;

  std::vector<double> column(VersionKind v, std::size_t label) const;
  std::vector<std::size_t> argmax(VersionKind v) const;
  std::size_t size() const { return kept_indices.size(); }
};

struct ComparisonCell {
  PairKey key;
  ComparisonKind comparison = ComparisonKind::tr;
  std::string label;
  double wd = 0.0;
  double t_p = 1.0;
  /// Label-independent; repeated on every cell of the same comparison.
  double chi2_p = 1.0;
  std::size_t n = 0;
};

using DirectionMap = std::vector<std::pair<std::string, Direction>>;

struct ShiftVerdict {
  PairKey key;
  ComparisonKind comparison = ComparisonKind::tr;
  std::vector<std::string> gained;
  std::vector<std::string> lost;
  ShiftStatus status = ShiftStatus::no_shift;
};

struct Correlations {
  std::optional<double> r_wd_tp;
  std::optional<double> r_wd_chi2p;
  std::optional<double> r_wd_bleu;
};

struct BleuScores {
  /// t_l1(c_l2) against c_l1: the direction used for correlations.
  std::optional<double> l2_to_l1;
  /// t_l2(c_l1) against c_l2.
  std::optional<double> l1_to_l2;
};

struct PairFailure {
  PairKey key;
  std::string message;
};

struct AuditReport {
  double alpha = 0.05;
  std::string config_fingerprint;
  std::vector<std::string> model_order;
  std::vector<ComparisonCell> cells;
  std::vector<ShiftVerdict> verdicts;
  Correlations correlations;
  std::map<std::string, Correlations> corpus_correlations;
  std::map<PairKey, BleuScores> bleu;
  std::map<PairKey, LabelSet> label_sets;
  std::vector<PairFailure> failures;
};

class AuditError : public std::runtime_error {
public:
  enum class Kind { AllSentencesDropped, InvalidPair };
  AuditError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Builds the three versions. Sentences whose translation fails at any step are
/// dropped from every version.
VersionedText build_versions(const ParallelCorpus &corpus, const LanguageCode &l1, const LanguageCode &l2,
                             Adapter &translator, const std::string &model = {}, const BatchOptions &options = {});

ScoredVersions score_versions(const VersionedText &versioned, Adapter &classifier, const BatchOptions &options = {});

/// One cell per label: W1 distance, two-sided paired t-test p and the shared
/// chi-squared p on argmax counts.
std::vector<ComparisonCell> compare(const ScoredVersions &scored, VersionKind a, VersionKind b);
std::vector<ComparisonCell> compare(const VersionedText &versioned, VersionKind a, VersionKind b, Adapter &classifier,
                                    const BatchOptions &options = {});

/// "up" when b's scores are significantly larger than a's (mass gained a -> b).
DirectionMap directional_scan(const ScoredVersions &scored, VersionKind a, VersionKind b, double alpha = 0.05);
DirectionMap directional_scan(const VersionedText &versioned, VersionKind a, VersionKind b, Adapter &classifier,
                              double alpha = 0.05, const BatchOptions &options = {});

struct ShiftOutcome {
  ShiftStatus status = ShiftStatus::no_shift;
  std::vector<std::string> gained;
  std::vector<std::string> lost;
};

ShiftOutcome shift_filter(const DirectionMap &directions);

Correlations correlation_analysis(const std::vector<ComparisonCell> &cells, const std::map<PairKey, BleuScores> &bleu);

/// Corpus BLEU for both directions over the surviving sentences.
BleuScores score_bleu(const VersionedText &versioned, bleu::TokenizeMode mode);

using AdapterFactory = std::function<std::shared_ptr<Adapter>()>;

struct AuditUnit {
  std::shared_ptr<const ParallelCorpus> corpus;
  LanguageCode l1;
  LanguageCode l2;
  std::string model;
  AdapterFactory translator;
  AdapterFactory classifier;
  LabelSet labels;
};

struct AuditOptions {
  double alpha = 0.05;
  bleu::TokenizeMode tokenize = bleu::TokenizeMode::whitespace;
  std::size_t chunk_size = 64;
  ResponseCache *cache = nullptr;
  unsigned jobs = 1;
  /// When set, per-version texts and scores are written below this directory.
  std::optional<std::filesystem::path> intermediate_dir;
  std::string config_fingerprint;
  std::vector<std::string> model_order;
};

/// Runs every unit, recording failures instead of aborting, then computes the
/// global correlations over the deterministically ordered cell list.
AuditReport run_audit(const std::vector<AuditUnit> &units, const AuditOptions &options);

} // namespace sentshift::audit
