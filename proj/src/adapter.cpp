#include "sentshift/adapter.hpp"

#include "sentshift/cache.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace sentshift {

using ojson = nlohmann::ordered_json;

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2)
    throw std::invalid_argument("a label set needs at least two labels");
  std::set<std::string> seen;
  for (const auto &l : labels_) {
    if (l.empty() || !seen.insert(l).second)
      throw std::invalid_argument("label set has an empty or repeated label '" + l + "'");
  }
}

std::optional<std::size_t> LabelSet::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t ScoreVector::argmax() const {
  // Strict comparison keeps the earliest label on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best])
      best = i;
  }
  return best;
}

bool Capabilities::supports(const LanguageCode &src, const LanguageCode &tgt) const {
  return std::find(pairs.begin(), pairs.end(), std::make_pair(src, tgt)) != pairs.end();
}

const LabelSet *Capabilities::labels_for(const LanguageCode &lang) const {
  auto it = labels.find(lang.str());
  return it == labels.end() ? nullptr : &it->second;
}

namespace protocol {

namespace {

[[noreturn]] void violation(std::string_view line, const std::string &why) {
  throw AdapterError(AdapterError::Kind::ProtocolViolation, "protocol violation (" + why + "): " + std::string(line),
                     std::string(line));
}

ojson parse_object(std::string_view line) {
  ojson j = ojson::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    violation(line, "not a JSON object");
  return j;
}

std::string string_field(const ojson &j, const char *name, std::string_view line) {
  auto it = j.find(name);
  if (it == j.end() || !it->is_string())
    violation(line, std::string("missing string field '") + name + "'");
  return it->get<std::string>();
}

LanguageCode lang_field(const ojson &j, const char *name, std::string_view line) {
  std::string code = string_field(j, name, line);
  if (!is_valid_language_code(code))
    violation(line, "bad language code '" + code + "'");
  return LanguageCode(code);
}

} // namespace

std::string serialize(const TranslationRequest &req) {
  ojson j = {{"op", "translate"}, {"id", req.id}, {"text", req.text}, {"src", req.src.str()}, {"tgt", req.tgt.str()}};
  return j.dump();
}

std::string serialize(const SentimentRequest &req) {
  ojson j = {{"op", "classify"}, {"id", req.id}, {"text", req.text}, {"lang", req.lang.str()}};
  return j.dump();
}

std::string serialize(const Request &req) {
  return std::visit([](const auto &r) { return serialize(r); }, req);
}

Request parse_request(std::string_view line) {
  ojson j = parse_object(line);
  std::string op = string_field(j, "op", line);
  if (op == "translate") {
    return TranslationRequest{string_field(j, "id", line), string_field(j, "text", line), lang_field(j, "src", line),
                              lang_field(j, "tgt", line)};
  }
  if (op == "classify")
    return SentimentRequest{string_field(j, "id", line), string_field(j, "text", line), lang_field(j, "lang", line)};
  violation(line, "unknown op '" + op + "'");
}

std::string serialize_caps(const Capabilities &caps) {
  ojson pairs = ojson::array();
  for (const auto &[src, tgt] : caps.pairs)
    pairs.push_back({src.str(), tgt.str()});
  ojson labels = ojson::object();
  for (const auto &[lang, set] : caps.labels)
    labels[lang] = set.labels();
  ojson body = {{"pairs", pairs}, {"labels", labels}};
  if (!caps.model.empty())
    body["model"] = caps.model;
  return ojson{{"caps", body}}.dump();
}

Capabilities parse_caps(std::string_view line) {
  ojson j = parse_object(line);
  auto it = j.find("caps");
  if (it == j.end() || !it->is_object())
    violation(line, "missing caps object");
  const ojson &body = *it;
  Capabilities caps;
  if (auto p = body.find("pairs"); p != body.end()) {
    if (!p->is_array())
      violation(line, "caps.pairs must be an array");
    for (const auto &pair : *p) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string() ||
          !is_valid_language_code(pair[0].get<std::string>()) || !is_valid_language_code(pair[1].get<std::string>()))
        violation(line, "caps.pairs entries must be [src, tgt]");
      caps.pairs.emplace_back(LanguageCode(pair[0].get<std::string>()), LanguageCode(pair[1].get<std::string>()));
    }
  }
  if (auto l = body.find("labels"); l != body.end()) {
    if (!l->is_object())
      violation(line, "caps.labels must be an object");
    for (const auto &[lang, set] : l->items()) {
      if (!is_valid_language_code(lang) || !set.is_array())
        violation(line, "caps.labels entries must map a language to a list");
      std::vector<std::string> names;
      for (const auto &n : set) {
        if (!n.is_string())
          violation(line, "labels must be strings");
        names.push_back(n.get<std::string>());
      }
      try {
        caps.labels.emplace(lang, LabelSet(std::move(names)));
      } catch (const std::invalid_argument &e) {
        violation(line, e.what());
      }
    }
  }
  if (auto m = body.find("model"); m != body.end() && m->is_string())
    caps.model = m->get<std::string>();
  return caps;
}

std::string serialize(const Response &resp) {
  ojson j = ojson::object();
  j["id"] = resp.id ? ojson(*resp.id) : ojson(nullptr);
  std::visit(
      [&j](const auto &p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TranslationPayload>) {
          j["translation"] = p.translation;
        } else if constexpr (std::is_same_v<T, ScoresPayload>) {
          ojson s = ojson::object();
          for (const auto &[label, value] : p.scores)
            s[label] = value;
          j["scores"] = s;
        } else {
          j["error"] = p.message;
        }
      },
      resp.payload);
  return j.dump();
}

Response parse_response(std::string_view line) {
  ojson j = parse_object(line);
  Response resp;
  auto id = j.find("id");
  if (id == j.end())
    violation(line, "missing id");
  if (id->is_string())
    resp.id = id->get<std::string>();
  else if (!id->is_null())
    violation(line, "id must be a string");

  if (auto e = j.find("error"); e != j.end()) {
    resp.payload = ErrorPayload{e->is_string() ? e->get<std::string>() : e->dump()};
  } else if (auto t = j.find("translation"); t != j.end()) {
    if (!t->is_string())
      violation(line, "translation must be a string");
    resp.payload = TranslationPayload{t->get<std::string>()};
  } else if (auto s = j.find("scores"); s != j.end()) {
    if (!s->is_object())
      violation(line, "scores must be an object");
    ScoresPayload payload;
    for (const auto &[label, value] : s->items()) {
      if (!value.is_number())
        violation(line, "score for '" + label + "' is not a number");
      payload.scores.emplace_back(label, value.get<double>());
    }
    resp.payload = std::move(payload);
  } else {
    violation(line, "response has no translation, scores or error");
  }
  return resp;
}

} // namespace protocol

ScoreVector normalize_scores(const std::string &id, const protocol::ScoresPayload &raw, const LabelSet &labels) {
  auto malformed = [&id](const std::string &why) {
    return AdapterError(AdapterError::Kind::MalformedScores, "malformed scores for '" + id + "': " + why, id);
  };
  if (raw.scores.size() != labels.size())
    throw malformed("expected " + std::to_string(labels.size()) + " labels");
  ScoreVector out{id, std::vector<double>(labels.size(), -1.0)};
  double sum = 0.0;
  for (const auto &[label, value] : raw.scores) {
    auto idx = labels.index_of(label);
    if (!idx)
      throw malformed("unknown label '" + label + "'");
    if (out.probs[*idx] >= 0.0)
      throw malformed("repeated label '" + label + "'");
    if (!std::isfinite(value) || value < 0.0 || value > 1.0)
      throw malformed("score " + std::to_string(value) + " outside [0,1]");
    out.probs[*idx] = value;
    sum += value;
  }
  if (std::fabs(sum - 1.0) > kScoreSumTolerance)
    throw malformed("scores sum to " + std::to_string(sum));
  // Vectors that already sum to one up to rounding are kept bit-exact, so equal
  // probabilities in two versions stay equal.
  if (std::fabs(sum - 1.0) > 1e-9)
    for (double &p : out.probs)
      p /= sum;
  return out;
}

namespace {

template <class Req> void check_unique_ids(std::span<const Req> requests) {
  std::unordered_set<std::string> seen;
  for (const auto &r : requests) {
    if (!seen.insert(r.id).second)
      throw AdapterError(AdapterError::Kind::DuplicateId, "duplicate request id '" + r.id + "'", r.id);
  }
}

/// Sends `pending` (indices into `requests`) in chunks and hands each matched
/// response to `accept`. Missing ids raise MissingResponse.
template <class Req, class Accept>
void run_chunks(Adapter &adapter, std::span<const Req> requests, const std::vector<std::size_t> &pending,
                std::size_t chunk_size, Accept &&accept) {
  chunk_size = std::max<std::size_t>(chunk_size, 1);
  for (std::size_t begin = 0; begin < pending.size(); begin += chunk_size) {
    const std::size_t end = std::min(pending.size(), begin + chunk_size);
    std::vector<std::string> lines;
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t k = begin; k < end; ++k) {
      const Req &req = requests[pending[k]];
      lines.push_back(protocol::serialize(req));
      by_id.emplace(req.id, pending[k]);
    }
    std::unordered_set<std::string> answered;
    for (const auto &line : adapter.exchange(lines)) {
      protocol::Response resp = protocol::parse_response(line);
      if (!resp.id || !by_id.contains(*resp.id))
        throw AdapterError(AdapterError::Kind::ProtocolViolation, "response for an unknown id: " + line, line);
      if (!answered.insert(*resp.id).second)
        throw AdapterError(AdapterError::Kind::ProtocolViolation, "duplicate response: " + line, line);
      accept(by_id.at(*resp.id), resp.payload, line);
    }
    for (std::size_t k = begin; k < end; ++k) {
      const std::string &id = requests[pending[k]].id;
      if (!answered.contains(id))
        throw AdapterError(AdapterError::Kind::MissingResponse,
                           "adapter '" + adapter.identity() + "' sent no response for '" + id + "'", id);
    }
  }
}

nlohmann::json cache_entry(const protocol::Payload &payload) {
  nlohmann::json entry = nlohmann::json::object();
  std::visit(
      [&entry](const auto &p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, protocol::TranslationPayload>) {
          entry["translation"] = p.translation;
        } else if constexpr (std::is_same_v<T, protocol::ScoresPayload>) {
          nlohmann::json labels = nlohmann::json::array();
          nlohmann::json values = nlohmann::json::array();
          for (const auto &[l, v] : p.scores) {
            labels.push_back(l);
            values.push_back(v);
          }
          entry["labels"] = labels;
          entry["scores"] = values;
        } else {
          entry["error"] = p.message;
        }
      },
      payload);
  return entry;
}

std::optional<protocol::Payload> payload_from_cache(const nlohmann::json &entry) {
  if (auto e = entry.find("error"); e != entry.end() && e->is_string())
    return protocol::ErrorPayload{e->get<std::string>()};
  if (auto t = entry.find("translation"); t != entry.end() && t->is_string())
    return protocol::TranslationPayload{t->get<std::string>()};
  auto l = entry.find("labels");
  auto s = entry.find("scores");
  if (l != entry.end() && s != entry.end() && l->is_array() && s->is_array() && l->size() == s->size()) {
    protocol::ScoresPayload p;
    for (std::size_t i = 0; i < l->size(); ++i) {
      if (!(*l)[i].is_string() || !(*s)[i].is_number())
        return std::nullopt;
      p.scores.emplace_back((*l)[i].get<std::string>(), (*s)[i].get<double>());
    }
    return p;
  }
  return std::nullopt;
}

} // namespace

TranslationBatch translate_batch(Adapter &adapter, std::span<const TranslationRequest> requests,
                                 const BatchOptions &options) {
  check_unique_ids(requests);
  TranslationBatch result;
  if (requests.empty())
    return result;

  const std::string identity = adapter.identity();
  std::vector<std::string> keys(requests.size());
  std::vector<std::size_t> pending;

  auto record = [&](std::size_t i, const protocol::Payload &payload, const std::string &line) {
    const TranslationRequest &req = requests[i];
    if (const auto *t = std::get_if<protocol::TranslationPayload>(&payload))
      result.translations[req.id] = t->translation;
    else if (const auto *e = std::get_if<protocol::ErrorPayload>(&payload))
      result.failures[req.id] = e->message;
    else
      throw AdapterError(AdapterError::Kind::ProtocolViolation, "scores in answer to a translate request: " + line,
                         line);
  };

  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto &req = requests[i];
    if (req.src == req.tgt)
      throw AdapterError(AdapterError::Kind::UnsupportedPair, "source and target language are both " + req.src.str(),
                         req.src.str() + "-" + req.tgt.str());
    if (options.cache) {
      keys[i] = ResponseCache::key("translate", req.text, req.src.str(), req.tgt.str(), identity);
      if (auto entry = options.cache->get(keys[i])) {
        if (auto payload = payload_from_cache(*entry)) {
          record(i, *payload, entry->dump());
          continue;
        }
      }
    }
    pending.push_back(i);
  }
  if (pending.empty())
    return result;

  const Capabilities &caps = adapter.capabilities();
  for (std::size_t i : pending) {
    const auto &req = requests[i];
    if (!caps.supports(req.src, req.tgt))
      throw AdapterError(AdapterError::Kind::UnsupportedPair,
                         "adapter '" + identity + "' does not translate " + req.src.str() + "->" + req.tgt.str(),
                         req.src.str() + "-" + req.tgt.str());
  }

  run_chunks(adapter, requests, pending, options.chunk_size,
             [&](std::size_t i, const protocol::Payload &payload, const std::string &line) {
               record(i, payload, line);
               if (options.cache)
                 options.cache->put(keys[i], cache_entry(payload));
             });
  return result;
}

ClassificationBatch classify_batch(Adapter &adapter, std::span<const SentimentRequest> requests,
                                   const BatchOptions &options) {
  check_unique_ids(requests);
  ClassificationBatch result;
  if (requests.empty()) {
    if (options.label_set)
      result.label_set = *options.label_set;
    return result;
  }
  const LanguageCode lang = requests.front().lang;
  for (const auto &r : requests) {
    if (r.lang != lang)
      throw std::invalid_argument("classify_batch needs a single language per batch");
  }

  const std::string identity = adapter.identity();
  auto adapter_labels = [&]() -> const LabelSet & {
    const LabelSet *declared = adapter.capabilities().labels_for(lang);
    if (!declared)
      throw AdapterError(AdapterError::Kind::UnsupportedPair,
                         "adapter '" + identity + "' declares no label set for " + lang.str(), lang.str());
    if (options.label_set && *options.label_set != *declared)
      throw AdapterError(AdapterError::Kind::ProtocolViolation,
                         "adapter '" + identity + "' label set for " + lang.str() + " differs from configuration",
                         identity);
    return *declared;
  };
  result.label_set = options.label_set ? *options.label_set : adapter_labels();

  std::vector<std::optional<ScoreVector>> slots(requests.size());
  std::vector<std::string> keys(requests.size());
  std::vector<std::size_t> pending;

  auto record = [&](std::size_t i, const protocol::Payload &payload, const std::string &line) {
    const SentimentRequest &req = requests[i];
    if (const auto *s = std::get_if<protocol::ScoresPayload>(&payload))
      slots[i] = normalize_scores(req.id, *s, result.label_set);
    else if (const auto *e = std::get_if<protocol::ErrorPayload>(&payload))
      result.failures[req.id] = e->message;
    else
      throw AdapterError(AdapterError::Kind::ProtocolViolation, "translation in answer to a classify request: " + line,
                         line);
  };

  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto &req = requests[i];
    if (options.cache) {
      keys[i] = ResponseCache::key("classify", req.text, "", req.lang.str(), identity);
      if (auto entry = options.cache->get(keys[i])) {
        if (auto payload = payload_from_cache(*entry)) {
          record(i, *payload, entry->dump());
          continue;
        }
      }
    }
    pending.push_back(i);
  }

  if (!pending.empty()) {
    adapter_labels();
    run_chunks(adapter, requests, pending, options.chunk_size,
               [&](std::size_t i, const protocol::Payload &payload, const std::string &line) {
                 record(i, payload, line);
                 if (options.cache)
                   options.cache->put(keys[i], cache_entry(payload));
               });
  }

  for (auto &slot : slots) {
    if (slot)
      result.scores.push_back(std::move(*slot));
  }
  return result;
}

} // namespace sentshift
