#include "sentshift/bleu.hpp"

#include "sentshift/unicode.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sentshift::bleu {

TokenizeMode parse_mode(std::string_view name) {
  if (name == "whitespace")
    return TokenizeMode::whitespace;
  if (name == "character")
    return TokenizeMode::character;
  throw std::invalid_argument("unknown tokenize mode '" + std::string(name) + "'");
}

std::string_view to_string(TokenizeMode mode) {
  return mode == TokenizeMode::whitespace ? "whitespace" : "character";
}

TokenizedSentence tokenize(std::string_view text, TokenizeMode mode) {
  TokenizedSentence tokens;
  std::string current;
  for (char32_t cp : unicode::decode(text)) {
    if (unicode::is_whitespace(cp)) {
      if (!current.empty())
        tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    const std::string piece = unicode::encode(unicode::to_lower(cp));
    if (mode == TokenizeMode::character)
      tokens.push_back(piece);
    else
      current += piece;
  }
  if (!current.empty())
    tokens.push_back(std::move(current));
  return tokens;
}

namespace {

using NgramCounts = std::map<std::span<const std::string>, long long,
                             decltype([](std::span<const std::string> a, std::span<const std::string> b) {
                               return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
                             })>;

NgramCounts count_ngrams(const TokenizedSentence &tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n)
    return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::span<const std::string>(tokens.data() + i, n)];
  return counts;
}

} // namespace

BleuStats corpus_stats(std::span<const TokenizedSentence> hypotheses, std::span<const TokenizedSentence> references,
                       int max_n) {
  if (hypotheses.size() != references.size())
    throw BleuError(BleuError::Kind::LengthMismatch, "hypothesis and reference counts differ");
  if (max_n < 1)
    throw std::invalid_argument("max_n must be positive");
  BleuStats stats;
  stats.matches.assign(static_cast<std::size_t>(max_n), 0);
  stats.totals.assign(static_cast<std::size_t>(max_n), 0);
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto &hyp = hypotheses[s];
    const auto &ref = references[s];
    stats.hyp_length += static_cast<long long>(hyp.size());
    stats.ref_length += static_cast<long long>(ref.size());
    for (int n = 1; n <= max_n; ++n) {
      const auto hyp_counts = count_ngrams(hyp, static_cast<std::size_t>(n));
      const auto ref_counts = count_ngrams(ref, static_cast<std::size_t>(n));
      for (const auto &[gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        stats.matches[n - 1] += it == ref_counts.end() ? 0 : std::min(count, it->second);
        stats.totals[n - 1] += count;
      }
    }
  }
  return stats;
}

double corpus_bleu(std::span<const TokenizedSentence> hypotheses, std::span<const TokenizedSentence> references,
                   int max_n) {
  const BleuStats stats = corpus_stats(hypotheses, references, max_n);
  if (stats.hyp_length == 0)
    throw BleuError(BleuError::Kind::EmptyInput, "all hypotheses are empty");

  double log_precision = 0.0;
  for (int n = 0; n < max_n; ++n) {
    if (stats.matches[n] == 0 || stats.totals[n] == 0)
      return 0.0;
    log_precision += std::log(static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n])) / max_n;
  }
  const double c = static_cast<double>(stats.hyp_length);
  const double r = static_cast<double>(stats.ref_length);
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * brevity * std::exp(log_precision);
}

} // namespace sentshift::bleu
