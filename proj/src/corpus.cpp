#include "sentshift/corpus.hpp"

#include "sentshift/unicode.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_set>

namespace sentshift {

namespace fs = std::filesystem;

bool is_valid_language_code(std::string_view code) {
  return !code.empty() &&
         std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

LanguageCode::LanguageCode(std::string code) : code_(std::move(code)) {
  if (!is_valid_language_code(code_))
    throw CorpusError(CorpusError::Kind::InvalidLanguage, "invalid language code '" + code_ + "'");
}

namespace {

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CorpusError(CorpusError::Kind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

std::vector<std::string> read_checked(const fs::path &path) {
  std::string content = read_file(path);
  if (auto bad = unicode::find_invalid_utf8(content)) {
    CorpusError err(CorpusError::Kind::InvalidEncoding,
                    path.string() + ": invalid UTF-8 at byte offset " + std::to_string(*bad));
    err.byte_offset = *bad;
    throw err;
  }
  return split_lines(content);
}

} // namespace

std::vector<std::string> split_lines(std::string_view content) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(content.substr(start));
      break;
    }
    std::string_view line = content.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

ParallelCorpus load_parallel(const fs::path &path_a, const fs::path &path_b, const LanguageCode &lang_a,
                             const LanguageCode &lang_b, std::string name) {
  if (lang_a == lang_b)
    throw CorpusError(CorpusError::Kind::InvalidLanguage, "corpus languages must differ: " + lang_a.str());

  std::vector<std::string> a = read_checked(path_a);
  std::vector<std::string> b = read_checked(path_b);

  // OPUS exports frequently end with a blank line; drop it only when both sides agree.
  if (!a.empty() && !b.empty() && a.back().empty() && b.back().empty()) {
    a.pop_back();
    b.pop_back();
  }

  if (a.size() != b.size()) {
    CorpusError err(CorpusError::Kind::LineCountMismatch,
                    "line count mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    err.count_a = a.size();
    err.count_b = b.size();
    throw err;
  }
  if (a.empty())
    throw CorpusError(CorpusError::Kind::EmptyCorpus, "corpus '" + name + "' is empty");

  ParallelCorpus corpus{std::move(name), lang_a, lang_b, {}};
  corpus.pairs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    corpus.pairs.push_back({i, std::move(a[i]), std::move(b[i])});
  return corpus;
}

ParallelCorpus load_moses(const fs::path &prefix, const LanguageCode &lang_a, const LanguageCode &lang_b,
                          std::string name) {
  return load_parallel(fs::path(prefix.string() + "." + lang_a.str()), fs::path(prefix.string() + "." + lang_b.str()),
                       lang_a, lang_b, std::move(name));
}

void write_moses(const ParallelCorpus &corpus, const fs::path &dir) {
  fs::create_directories(dir);
  std::ofstream a(dir / (corpus.name + "." + corpus.lang_a.str()), std::ios::binary);
  std::ofstream b(dir / (corpus.name + "." + corpus.lang_b.str()), std::ios::binary);
  if (!a || !b)
    throw CorpusError(CorpusError::Kind::Io, "cannot write corpus into " + dir.string());
  for (const auto &p : corpus.pairs) {
    a << p.text_a << '\n';
    b << p.text_b << '\n';
  }
}

ParallelCorpus sample(const ParallelCorpus &corpus, std::size_t n, std::uint64_t seed) {
  const std::size_t total = corpus.pairs.size();
  if (n == 0 || n > total)
    throw CorpusError(CorpusError::Kind::SampleTooLarge,
                      "cannot sample " + std::to_string(n) + " of " + std::to_string(total) + " pairs");

  // Floyd's algorithm with a rejection-sampled bounded draw, so results do not
  // depend on the standard library's distribution implementations.
  std::mt19937_64 rng(seed);
  auto bounded = [&rng](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    return r % bound;
  };
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(n * 2);
  for (std::size_t j = total - n; j < total; ++j) {
    std::size_t t = bounded(j + 1);
    if (!chosen.insert(t).second)
      chosen.insert(j);
  }
  std::vector<std::size_t> picked(chosen.begin(), chosen.end());
  std::sort(picked.begin(), picked.end());

  ParallelCorpus out{corpus.name, corpus.lang_a, corpus.lang_b, {}};
  out.pairs.reserve(n);
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const auto &src = corpus.pairs[picked[i]];
    out.pairs.push_back({i, src.text_a, src.text_b});
  }
  return out;
}

} // namespace sentshift
