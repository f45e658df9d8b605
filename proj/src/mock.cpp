#include "sentshift/mock.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sentshift {

const SentimentLexicon &default_lexicon() {
  static const SentimentLexicon lexicon = [] {
    SentimentLexicon l;
    for (const char *w : {"good", "great", "happy", "love", "wonderful", "excellent", "nice", "joy"})
      l[w] = "positive";
    for (const char *w : {"bad", "sad", "terrible", "awful", "hate", "poor", "angry", "pain"})
      l[w] = "negative";
    for (const char *w : {"okay", "usual", "plain", "regular", "average", "normal", "common", "fine"})
      l[w] = "neutral";
    return l;
  }();
  return lexicon;
}

const RewriteMap &default_rewrite_map() {
  static const RewriteMap map = {{"good", "okay"},       {"great", "usual"},      {"happy", "plain"},
                                 {"love", "regular"},    {"wonderful", "average"}, {"excellent", "normal"},
                                 {"nice", "common"},     {"joy", "fine"}};
  return map;
}

const LabelSet &three_class_labels() {
  static const LabelSet labels({"positive", "negative", "neutral"});
  return labels;
}

const LabelSet &binary_labels() {
  static const LabelSet labels({"positive", "negative"});
  return labels;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

bool is_sep(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

struct Span {
  std::size_t begin;
  std::size_t length;
};

std::vector<Span> token_spans(const std::string &text) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_sep(text[i]))
      ++i;
    std::size_t start = i;
    while (i < text.size() && !is_sep(text[i]))
      ++i;
    std::size_t end = i;
    while (start < end && std::ispunct(static_cast<unsigned char>(text[start])))
      ++start;
    while (end > start && std::ispunct(static_cast<unsigned char>(text[end - 1])))
      --end;
    if (end > start)
      spans.push_back({start, end - start});
  }
  return spans;
}

std::string normalize_token(std::string_view token) {
  std::size_t b = 0;
  std::size_t e = token.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(token[b])))
    ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1])))
    --e;
  std::string out(token.substr(b, e - b));
  for (char &c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

} // namespace

std::string biased_rewrite(const std::string &text, double shift_fraction, const RewriteMap &rewrite,
                           std::uint64_t seed) {
  if (!(shift_fraction >= 0.0 && shift_fraction <= 1.0))
    throw std::invalid_argument("shift_fraction must lie in [0,1]");
  const auto spans = token_spans(text);
  struct Candidate {
    std::uint64_t rank;
    std::size_t span;
  };
  std::vector<Candidate> candidates;
  for (std::size_t s = 0; s < spans.size(); ++s) {
    const std::string tok = normalize_token(std::string_view(text.data() + spans[s].begin, spans[s].length));
    if (rewrite.contains(tok)) {
      const std::uint64_t ordinal = candidates.size();
      candidates.push_back({splitmix64(seed ^ splitmix64(ordinal) ^ fnv1a(tok)), s});
    }
  }
  const auto k = static_cast<std::size_t>(std::floor(shift_fraction * static_cast<double>(candidates.size()) + 0.5));
  if (k == 0)
    return text;
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate &a, const Candidate &b) { return a.rank < b.rank; });
  std::vector<bool> chosen(spans.size(), false);
  for (std::size_t i = 0; i < k; ++i)
    chosen[candidates[i].span] = true;

  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < spans.size(); ++s) {
    out.append(text, cursor, spans[s].begin - cursor);
    const std::string_view tok(text.data() + spans[s].begin, spans[s].length);
    if (chosen[s])
      out += rewrite.at(normalize_token(tok));
    else
      out += tok;
    cursor = spans[s].begin + spans[s].length;
  }
  out.append(text, cursor, std::string::npos);
  return out;
}

std::vector<double> lexicon_scores(const std::string &text, const SentimentLexicon &lexicon, const LabelSet &labels) {
  std::vector<double> counts(labels.size(), 0.0);
  double hits = 0.0;
  for (const auto &span : token_spans(text)) {
    auto it = lexicon.find(normalize_token(std::string_view(text).substr(span.begin, span.length)));
    if (it == lexicon.end())
      continue;
    if (auto idx = labels.index_of(it->second)) {
      counts[*idx] += 1.0;
      hits += 1.0;
    }
  }
  const double denom = hits + static_cast<double>(labels.size());
  for (double &c : counts)
    c = (c + 1.0) / denom;
  return counts;
}

MockServer::MockServer(MockOptions options) : options_(std::move(options)) {
  caps_.model = options_.model;
  if (options_.translation != MockOptions::Translation::None) {
    for (const auto &src : options_.languages)
      for (const auto &tgt : options_.languages)
        if (src != tgt)
          caps_.pairs.emplace_back(LanguageCode(src), LanguageCode(tgt));
  }
  if (options_.classify) {
    for (const auto &lang : options_.languages)
      caps_.labels.emplace(lang, options_.binary_languages.contains(lang) ? binary_labels() : three_class_labels());
  }
}

std::string MockServer::identity() const {
  std::ostringstream id;
  id << "mock:" << options_.model << ":t" << static_cast<int>(options_.translation) << ":s" << options_.shift_fraction
     << ":r" << options_.seed;
  for (const auto &lang : options_.binary_languages)
    id << ":b" << lang;
  return id.str();
}

std::optional<std::string> MockServer::handle(std::string_view line) const {
  using namespace protocol;
  protocol::Request request;
  try {
    request = parse_request(line);
  } catch (const AdapterError &e) {
    std::optional<std::string> id;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("id") && j["id"].is_string())
      id = j["id"].get<std::string>();
    return serialize(Response{id, ErrorPayload{"malformed request"}});
  }

  const std::string &id = std::visit([](const auto &r) -> const std::string & { return r.id; }, request);
  const std::string &text = std::visit([](const auto &r) -> const std::string & { return r.text; }, request);
  if (options_.drop_ids.contains(id))
    return std::nullopt;
  for (const auto &needle : options_.fail_substrings) {
    if (!needle.empty() && text.find(needle) != std::string::npos)
      return serialize(Response{id, ErrorPayload{"injected failure"}});
  }

  if (const auto *t = std::get_if<TranslationRequest>(&request)) {
    if (!caps_.supports(t->src, t->tgt))
      return serialize(Response{id, ErrorPayload{"unsupported pair"}});
    if (options_.translation == MockOptions::Translation::Biased)
      return serialize(Response{id, TranslationPayload{biased_rewrite(t->text, options_.shift_fraction,
                                                                      options_.rewrite, options_.seed)}});
    return serialize(Response{id, TranslationPayload{t->text}});
  }

  const auto &c = std::get<SentimentRequest>(request);
  const LabelSet *labels = caps_.labels_for(c.lang);
  if (!labels)
    return serialize(Response{id, ErrorPayload{"unsupported language"}});
  const auto probs = lexicon_scores(c.text, options_.lexicon, *labels);
  ScoresPayload payload;
  for (std::size_t i = 0; i < labels->size(); ++i)
    payload.scores.emplace_back((*labels)[i], probs[i]);
  return serialize(Response{id, std::move(payload)});
}

InProcessAdapter::InProcessAdapter(MockOptions options) : server_(std::move(options)) {}

const Capabilities &InProcessAdapter::capabilities() {
  ++handshakes_;
  return server_.capabilities();
}

std::vector<std::string> InProcessAdapter::exchange(const std::vector<std::string> &request_lines) {
  std::vector<std::string> out;
  for (const auto &line : request_lines) {
    ++requests_;
    if (auto resp = server_.handle(line))
      out.push_back(std::move(*resp));
  }
  return out;
}

std::unique_ptr<InProcessAdapter> mock_identity_translator() {
  MockOptions o;
  o.translation = MockOptions::Translation::Identity;
  o.classify = false;
  o.model = "identity";
  return std::make_unique<InProcessAdapter>(std::move(o));
}

std::unique_ptr<InProcessAdapter> mock_biased_translator(double shift_fraction, const RewriteMap &lexicon,
                                                         std::uint64_t seed) {
  if (!(shift_fraction >= 0.0 && shift_fraction <= 1.0))
    throw std::invalid_argument("shift_fraction must lie in [0,1]");
  MockOptions o;
  o.translation = MockOptions::Translation::Biased;
  o.shift_fraction = shift_fraction;
  o.seed = seed;
  o.rewrite = lexicon;
  o.classify = false;
  o.model = "biased";
  return std::make_unique<InProcessAdapter>(std::move(o));
}

std::unique_ptr<InProcessAdapter> mock_lexicon_classifier(const SentimentLexicon &lexicon,
                                                          std::set<std::string> binary_languages) {
  MockOptions o;
  o.translation = MockOptions::Translation::None;
  o.lexicon = lexicon;
  o.binary_languages = std::move(binary_languages);
  o.model = "lexicon";
  return std::make_unique<InProcessAdapter>(std::move(o));
}

} // namespace sentshift
