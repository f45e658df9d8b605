#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sentshift::bleu {

enum class TokenizeMode { whitespace, character };

TokenizeMode parse_mode(std::string_view name);
std::string_view to_string(TokenizeMode mode);

using TokenizedSentence = std::vector<std::string>;

/// Whitespace mode lowercases and splits on Unicode whitespace; character mode
/// emits each non-whitespace code point as its own token (also lowercased).
TokenizedSentence tokenize(std::string_view text, TokenizeMode mode = TokenizeMode::whitespace);

class BleuError : public std::invalid_argument {
public:
  enum class Kind { LengthMismatch, EmptyInput };
  BleuError(Kind kind, const std::string &what) : std::invalid_argument(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

struct BleuStats {
  std::vector<long long> matches;
  std::vector<long long> totals;
  long long hyp_length = 0;
  long long ref_length = 0;
};

/// Clipped n-gram counts aggregated over the corpus.
BleuStats corpus_stats(std::span<const TokenizedSentence> hypotheses, std::span<const TokenizedSentence> references,
                       int max_n = 4);

/// Corpus BLEU on a 0-100 scale: single reference, uniform weights, no smoothing.
double corpus_bleu(std::span<const TokenizedSentence> hypotheses, std::span<const TokenizedSentence> references,
                   int max_n = 4);

} // namespace sentshift::bleu
