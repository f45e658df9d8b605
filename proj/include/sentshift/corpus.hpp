#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sentshift {

/// Lowercase ASCII language tag such as "de" or "zh".
class LanguageCode {
public:
  LanguageCode() = default;
  explicit LanguageCode(std::string code);

  const std::string &str() const { return code_; }
  bool empty() const { return code_.empty(); }

  friend auto operator<=>(const LanguageCode &, const LanguageCode &) = default;

private:
  std::string code_;
};

bool is_valid_language_code(std::string_view code);

struct SentencePair {
  std::size_t index = 0;
  std::string text_a;
  std::string text_b;

  friend bool operator==(const SentencePair &, const SentencePair &) = default;
};

struct ParallelCorpus {
  std::string name;
  LanguageCode lang_a;
  LanguageCode lang_b;
  std::vector<SentencePair> pairs;

  std::size_t size() const { return pairs.size(); }
  friend bool operator==(const ParallelCorpus &, const ParallelCorpus &) = default;
};

class CorpusError : public std::runtime_error {
public:
  enum class Kind { LineCountMismatch, InvalidEncoding, EmptyCorpus, SampleTooLarge, InvalidLanguage, Io };

  CorpusError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

  std::size_t count_a = 0;
  std::size_t count_b = 0;
  std::size_t byte_offset = 0;

private:
  Kind kind_;
};

/// Reads a line-aligned Moses/OPUS pair. A single trailing empty line present in
/// both files is dropped; empty lines elsewhere are kept as empty sentences.
ParallelCorpus load_parallel(const std::filesystem::path &path_a, const std::filesystem::path &path_b,
                             const LanguageCode &lang_a, const LanguageCode &lang_b, std::string name);

/// Convenience for the `<prefix>.<lang>` naming convention.
ParallelCorpus load_moses(const std::filesystem::path &prefix, const LanguageCode &lang_a,
                          const LanguageCode &lang_b, std::string name);

/// Writes `<dir>/<name>.<lang_a>` and `<dir>/<name>.<lang_b>`.
void write_moses(const ParallelCorpus &corpus, const std::filesystem::path &dir);

/// Seeded sample without replacement; keeps source order and renumbers from 0.
ParallelCorpus sample(const ParallelCorpus &corpus, std::size_t n, std::uint64_t seed);

/// Splits a buffer into lines with the corpus trailing-newline convention.
std::vector<std::string> split_lines(std::string_view content);

} // namespace sentshift
