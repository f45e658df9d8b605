#pragma once

#include "sentshift/adapter.hpp"

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace sentshift {

/// word -> label name
using SentimentLexicon = std::map<std::string, std::string>;
/// positive word -> neutral replacement
using RewriteMap = std::map<std::string, std::string>;

const SentimentLexicon &default_lexicon();
const RewriteMap &default_rewrite_map();
const LabelSet &three_class_labels();
const LabelSet &binary_labels();

/// Rewrites round(shift_fraction * m) of the m rewritable tokens in `text`.
/// The rewritten occurrences are those with the smallest seeded hash, so the
/// count is exact and the selection deterministic. Separators are preserved.
std::string biased_rewrite(const std::string &text, double shift_fraction, const RewriteMap &rewrite,
                           std::uint64_t seed);

/// Laplace-smoothed lexicon counts: (hits(label) + 1) / (total hits + K).
/// Text with no hits therefore scores 1/K for every label.
std::vector<double> lexicon_scores(const std::string &text, const SentimentLexicon &lexicon, const LabelSet &labels);

struct MockOptions {
  enum class Translation { None, Identity, Biased };

  Translation translation = Translation::Identity;
  double shift_fraction = 0.0;
  std::uint64_t seed = 0;
  RewriteMap rewrite = default_rewrite_map();

  bool classify = true;
  SentimentLexicon lexicon = default_lexicon();
  std::vector<std::string> languages = {"de", "en", "es", "he", "zh"};
  /// Languages whose classifier only knows positive/negative.
  std::set<std::string> binary_languages;

  /// Requests with these ids are silently dropped.
  std::set<std::string> drop_ids;
  /// Requests whose text contains one of these substrings get an error object.
  std::vector<std::string> fail_substrings;
  std::string model = "mock";
};

/// Request handler shared by the in-process mocks and the mock adapter executable.
class MockServer {
public:
  explicit MockServer(MockOptions options);

  const Capabilities &capabilities() const { return caps_; }
  const MockOptions &options() const { return options_; }
  /// One response line per request line, or nullopt for a dropped id.
  /// Malformed input yields an error object rather than an exception.
  std::optional<std::string> handle(std::string_view line) const;
  std::string identity() const;

private:
  MockOptions options_;
  Capabilities caps_;
};

/// Adapter that answers in-process through a MockServer and counts requests.
class InProcessAdapter : public Adapter {
public:
  explicit InProcessAdapter(MockOptions options);

  std::string identity() const override { return server_.identity(); }
  const Capabilities &capabilities() override;
  std::vector<std::string> exchange(const std::vector<std::string> &request_lines) override;
  bool reentrant() const override { return true; }

  std::size_t requests_seen() const { return requests_; }
  std::size_t handshakes() const { return handshakes_; }

private:
  MockServer server_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> handshakes_{0};
};

std::unique_ptr<InProcessAdapter> mock_identity_translator();
std::unique_ptr<InProcessAdapter> mock_biased_translator(double shift_fraction, const RewriteMap &lexicon,
                                                         std::uint64_t seed);
std::unique_ptr<InProcessAdapter> mock_lexicon_classifier(const SentimentLexicon &lexicon = default_lexicon(),
                                                          std::set<std::string> binary_languages = {});

} // namespace sentshift
