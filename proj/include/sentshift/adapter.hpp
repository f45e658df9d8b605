#pragma once

#include "sentshift/corpus.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace sentshift {

class ResponseCache;

struct TranslationRequest {
  std::string id;
  std::string text;
  LanguageCode src;
  LanguageCode tgt;

  friend bool operator==(const TranslationRequest &, const TranslationRequest &) = default;
};

struct SentimentRequest {
  std::string id;
  std::string text;
  LanguageCode lang;

  friend bool operator==(const SentimentRequest &, const SentimentRequest &) = default;
};

/// Ordered label names. Order decides argmax tie-breaking and report column order.
class LabelSet {
public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels);

  const std::vector<std::string> &labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  const std::string &operator[](std::size_t i) const { return labels_[i]; }
  std::optional<std::size_t> index_of(std::string_view label) const;

  friend bool operator==(const LabelSet &, const LabelSet &) = default;

private:
  std::vector<std::string> labels_;
};

/// Probabilities aligned with the LabelSet the vector was produced under.
struct ScoreVector {
  std::string id;
  std::vector<double> probs;

  std::size_t argmax() const;
};

struct Capabilities {
  std::vector<std::pair<LanguageCode, LanguageCode>> pairs;
  std::map<std::string, LabelSet> labels;
  std::string model;

  bool supports(const LanguageCode &src, const LanguageCode &tgt) const;
  const LabelSet *labels_for(const LanguageCode &lang) const;
};

class AdapterError : public std::runtime_error {
public:
  enum class Kind { AdapterUnavailable, UnsupportedPair, MissingResponse, ProtocolViolation, MalformedScores, DuplicateId };

  AdapterError(Kind kind, const std::string &what, std::string detail = {})
      : std::runtime_error(what), kind_(kind), detail_(std::move(detail)) {}

  Kind kind() const { return kind_; }
  /// The offending request id, response line or command, depending on kind.
  const std::string &detail() const { return detail_; }

private:
  Kind kind_;
  std::string detail_;
};

/// Transport to one model process (or an in-process stand-in). Implementations
/// exchange newline-free JSON request lines for JSON response lines.
class Adapter {
public:
  virtual ~Adapter() = default;

  /// Stable identity used in cache keys.
  virtual std::string identity() const = 0;
  /// Performs the startup handshake if it has not happened yet.
  virtual const Capabilities &capabilities() = 0;
  /// Sends one chunk and returns whatever responses arrive, in arrival order.
  /// Returns fewer lines than requested when the peer drops ids.
  virtual std::vector<std::string> exchange(const std::vector<std::string> &request_lines) = 0;
  virtual bool reentrant() const { return false; }
};

namespace protocol {

using Request = std::variant<TranslationRequest, SentimentRequest>;

std::string serialize(const TranslationRequest &req);
std::string serialize(const SentimentRequest &req);
std::string serialize(const Request &req);
/// Throws AdapterError(ProtocolViolation) on anything that is not a request object.
Request parse_request(std::string_view line);

std::string serialize_caps(const Capabilities &caps);
Capabilities parse_caps(std::string_view line);

struct TranslationPayload {
  std::string translation;
};
struct ScoresPayload {
  std::vector<std::pair<std::string, double>> scores;
};
struct ErrorPayload {
  std::string message;
};
using Payload = std::variant<TranslationPayload, ScoresPayload, ErrorPayload>;

struct Response {
  std::optional<std::string> id;
  Payload payload;
};

std::string serialize(const Response &resp);
Response parse_response(std::string_view line);

} // namespace protocol

struct BatchOptions {
  std::size_t chunk_size = 64;
  ResponseCache *cache = nullptr;
  /// Label set expected from the classifier (from configuration). When set,
  /// fully cached batches never contact the adapter.
  std::optional<LabelSet> label_set;
};

/// Every request id lands in exactly one of the two maps.
struct TranslationBatch {
  std::map<std::string, std::string> translations;
  std::map<std::string, std::string> failures;
};

struct ClassificationBatch {
  LabelSet label_set;
  /// Successful vectors in request order.
  std::vector<ScoreVector> scores;
  std::map<std::string, std::string> failures;
};

inline constexpr double kScoreSumTolerance = 0.01;

TranslationBatch translate_batch(Adapter &adapter, std::span<const TranslationRequest> requests,
                                 const BatchOptions &options = {});

ClassificationBatch classify_batch(Adapter &adapter, std::span<const SentimentRequest> requests,
                                   const BatchOptions &options = {});

/// Checks scores against the label set and renormalizes to sum 1.
/// Throws AdapterError(MalformedScores) when keys differ, a score leaves [0,1]
/// or the raw sum deviates from 1 by more than kScoreSumTolerance.
ScoreVector normalize_scores(const std::string &id, const protocol::ScoresPayload &raw, const LabelSet &labels);

} // namespace sentshift
