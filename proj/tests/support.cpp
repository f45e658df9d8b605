#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>

namespace testsupport {

using namespace sentshift;

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "sentshift-test-XXXXXX").string();
  if (!mkdtemp(pattern.data()))
    throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path mock_adapter() { return SENTSHIFT_MOCK_ADAPTER; }
fs::path cli() { return SENTSHIFT_CLI; }

bool rel_close(double actual, double expected, double rel, double abs_floor) {
  if (actual == expected)
    return true;
  const double diff = std::fabs(actual - expected);
  return diff <= rel * std::fabs(expected) || diff <= abs_floor;
}

ParallelCorpus lexicon_corpus(std::size_t n, std::uint64_t seed, const std::string &lang_a, const std::string &lang_b,
                              const std::string &name) {
  static const std::vector<std::string> positive = {"good", "great", "happy", "love", "wonderful", "excellent", "nice", "joy"};
  static const std::vector<std::string> negative = {"bad", "sad", "terrible", "awful", "hate", "poor", "angry", "pain"};
  static const std::vector<std::string> neutral = {"okay", "usual", "plain", "regular", "average", "normal"};
  static const std::vector<std::string> filler = {"the", "a", "day", "film", "food", "it", "was", "very", "and", "we"};
  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<std::string> &v) { return v[rng() % v.size()]; };
  ParallelCorpus corpus{name, LanguageCode(lang_a), LanguageCode(lang_b), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = 4 + rng() % 8;
    std::string text;
    for (std::size_t k = 0; k < len; ++k) {
      const auto r = rng() % 10;
      const std::string word = r < 3 ? pick(positive) : r < 5 ? pick(negative) : r < 6 ? pick(neutral) : pick(filler);
      text += (k ? " " : "") + word;
    }
    if (rng() % 4 == 0)
      text += ".";
    corpus.pairs.push_back({i, text, text});
  }
  return corpus;
}

void write_text(const fs::path &path, const std::string &content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static std::string shell_quote(const std::string &s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

CommandResult run(const std::vector<std::string> &argv, const fs::path &scratch) {
  std::string cmd;
  for (const auto &a : argv)
    cmd += shell_quote(a) + " ";
  const fs::path out = scratch / ".stdout";
  const fs::path err = scratch / ".stderr";
  cmd += ">" + shell_quote(out.string()) + " 2>" + shell_quote(err.string());
  const int status = std::system(cmd.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text(out);
  r.err = read_text(err);
  return r;
}

nlohmann::json mock_command(const std::vector<std::string> &flags) {
  nlohmann::json cmd = nlohmann::json::array({mock_adapter().string()});
  for (const auto &f : flags)
    cmd.push_back(f);
  return cmd;
}

std::size_t count_log(const fs::path &log, const std::string &prefix) {
  std::ifstream in(log);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);)
    if (line.rfind(prefix, 0) == 0)
      ++n;
  return n;
}

std::vector<std::string> conformance_failures(Adapter &adapter) {
  std::vector<std::string> failures;
  const Capabilities *caps = nullptr;
  try {
    caps = &adapter.capabilities();
  } catch (const std::exception &e) {
    return {std::string("handshake: ") + e.what()};
  }
  if (caps->pairs.empty() && caps->labels.empty())
    failures.push_back("handshake: no pairs and no label sets declared");

  if (!caps->pairs.empty()) {
    const auto &[src, tgt] = caps->pairs.front();
    std::vector<std::string> lines;
    std::set<std::string> expected;
    for (int i = 9; i >= 0; --i) {
      const std::string id = "conf-" + std::to_string(i * 7 % 10);
      expected.insert(id);
      lines.push_back(protocol::serialize(TranslationRequest{id, "sentence " + std::to_string(i), src, tgt}));
    }
    std::multiset<std::string> seen;
    for (const auto &line : adapter.exchange(lines)) {
      try {
        auto resp = protocol::parse_response(line);
        if (!resp.id)
          failures.push_back("translate: response without id: " + line);
        else
          seen.insert(*resp.id);
      } catch (const std::exception &e) {
        failures.push_back(std::string("translate: unparsable response: ") + e.what());
      }
    }
    if (std::multiset<std::string>(expected.begin(), expected.end()) != seen)
      failures.push_back("translate: response ids do not match request ids one to one");
  }

  const auto malformed = adapter.exchange({"{this is not json"});
  if (malformed.size() != 1) {
    failures.push_back("malformed line: expected one error object");
  } else {
    try {
      auto resp = protocol::parse_response(malformed.front());
      if (!std::holds_alternative<protocol::ErrorPayload>(resp.payload))
        failures.push_back("malformed line: response is not an error object");
    } catch (const std::exception &e) {
      failures.push_back(std::string("malformed line: unparsable response: ") + e.what());
    }
  }

  for (const auto &[lang, labels] : caps->labels) {
    const auto lines = adapter.exchange({protocol::serialize(SentimentRequest{"conf-c-" + lang, "a good day", LanguageCode(lang)})});
    if (lines.size() != 1) {
      failures.push_back("classify " + lang + ": no response (adapter died after malformed input?)");
      continue;
    }
    try {
      auto resp = protocol::parse_response(lines.front());
      const auto *scores = std::get_if<protocol::ScoresPayload>(&resp.payload);
      if (!scores) {
        failures.push_back("classify " + lang + ": no scores");
        continue;
      }
      normalize_scores(*resp.id, *scores, labels);
    } catch (const std::exception &e) {
      failures.push_back("classify " + lang + ": " + e.what());
    }
  }
  return failures;
}

} // namespace testsupport
