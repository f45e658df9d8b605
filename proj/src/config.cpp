#include "sentshift/config.hpp"

#include "sentshift/hash.hpp"
#include "sentshift/process.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace sentshift {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string> &items) {
  std::string out;
  for (const auto &i : items) {
    if (!out.empty())
      out += "; ";
    out += i;
  }
  return out;
}

class Checker {
public:
  std::vector<std::string> problems;

  void fail(const std::string &where, const std::string &what) { problems.push_back(where + ": " + what); }

  const json *field(const json &obj, const char *name, const std::string &where, bool required = true) {
    auto it = obj.find(name);
    if (it == obj.end()) {
      if (required)
        fail(where, std::string("missing '") + name + "'");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> string_field(const json &obj, const char *name, const std::string &where,
                                          bool required = true) {
    const json *f = field(obj, name, where, required);
    if (!f)
      return std::nullopt;
    if (!f->is_string()) {
      fail(where, std::string("'") + name + "' must be a string");
      return std::nullopt;
    }
    return f->get<std::string>();
  }

  std::optional<LanguageCode> lang(const json &value, const std::string &where) {
    if (!value.is_string() || !is_valid_language_code(value.get<std::string>())) {
      fail(where, "invalid language code " + value.dump());
      return std::nullopt;
    }
    return LanguageCode(value.get<std::string>());
  }

  std::optional<CommandSpec> command(const json &obj, const char *name, const std::string &where) {
    const json *f = field(obj, name, where);
    if (!f)
      return std::nullopt;
    CommandSpec cmd;
    if (f->is_string() && !f->get<std::string>().empty()) {
      cmd.display = f->get<std::string>();
      cmd.argv = command_argv(cmd.display);
      return cmd;
    }
    if (f->is_array() && !f->empty()) {
      for (const auto &a : *f) {
        if (!a.is_string()) {
          fail(where, std::string("'") + name + "' entries must be strings");
          return std::nullopt;
        }
        cmd.argv.push_back(a.get<std::string>());
        if (!cmd.display.empty())
          cmd.display += ' ';
        cmd.display += a.get<std::string>();
      }
      return cmd;
    }
    fail(where, std::string("'") + name + "' must be a non-empty string or array");
    return std::nullopt;
  }
};

fs::path resolve(const fs::path &base, const fs::path &p) { return p.is_absolute() ? p : base / p; }

} // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error("invalid configuration: " + join_lines(diagnostics)), diagnostics_(std::move(diagnostics)) {}

RunConfig parse_config(const json &doc, const fs::path &base_dir) {
  Checker check;
  RunConfig config;
  config.base_dir = base_dir;
  if (!doc.is_object())
    throw ConfigError({"config: top level must be an object"});

  static const std::set<std::string> known = {"corpora", "models", "classifiers", "alpha", "sample", "tokenize",
                                              "out_dir", "batch_size", "handshake_timeout_s", "response_timeout_s"};
  for (const auto &[key, _] : doc.items())
    if (!known.contains(key))
      check.fail("config", "unknown key '" + key + "'");

  if (const json *corpora = check.field(doc, "corpora", "config")) {
    if (!corpora->is_array() || corpora->empty())
      check.fail("corpora", "must be a non-empty array");
    else {
      std::set<std::string> names;
      for (std::size_t i = 0; i < corpora->size(); ++i) {
        const json &c = (*corpora)[i];
        std::string where = "corpora[" + std::to_string(i) + "]";
        if (!c.is_object()) {
          check.fail(where, "must be an object");
          continue;
        }
        CorpusSpec entry;
        auto name = check.string_field(c, "name", where);
        if (name) {
          where = "corpus '" + *name + "'";
          entry.name = *name;
          if (!names.insert(*name).second)
            check.fail(where, "duplicate corpus name");
        }
        std::optional<LanguageCode> la;
        std::optional<LanguageCode> lb;
        if (const json *v = check.field(c, "lang_a", where))
          la = check.lang(*v, where);
        if (const json *v = check.field(c, "lang_b", where))
          lb = check.lang(*v, where);
        if (la && lb && *la == *lb)
          check.fail(where, "lang_a and lang_b must differ");
        auto prefix = check.string_field(c, "prefix", where, false);
        auto pa = check.string_field(c, "path_a", where, !prefix);
        auto pb = check.string_field(c, "path_b", where, !prefix);
        if (la && lb) {
          entry.lang_a = *la;
          entry.lang_b = *lb;
          if (prefix) {
            entry.path_a = resolve(base_dir, *prefix + "." + la->str());
            entry.path_b = resolve(base_dir, *prefix + "." + lb->str());
          }
          if (pa)
            entry.path_a = resolve(base_dir, *pa);
          if (pb)
            entry.path_b = resolve(base_dir, *pb);
          if (const json *dirs = check.field(c, "directions", where, false)) {
            if (!dirs->is_array())
              check.fail(where, "'directions' must be an array of [l1, l2]");
            else
              for (const auto &d : *dirs) {
                if (!d.is_array() || d.size() != 2) {
                  check.fail(where, "'directions' entries must be [l1, l2]");
                  continue;
                }
                auto l1 = check.lang(d[0], where);
                auto l2 = check.lang(d[1], where);
                if (!l1 || !l2)
                  continue;
                if (!((*l1 == *la && *l2 == *lb) || (*l1 == *lb && *l2 == *la)))
                  check.fail(where, "direction " + l1->str() + "-" + l2->str() + " is not a pair of this corpus");
                else
                  entry.directions.emplace_back(*l1, *l2);
              }
          } else {
            entry.directions = {{*la, *lb}, {*lb, *la}};
          }
        }
        config.corpora.push_back(std::move(entry));
      }
    }
  }

  if (const json *models = check.field(doc, "models", "config")) {
    if (!models->is_array() || models->empty())
      check.fail("models", "must be a non-empty array");
    else {
      std::set<std::string> codes;
      for (std::size_t i = 0; i < models->size(); ++i) {
        const json &m = (*models)[i];
        std::string where = "models[" + std::to_string(i) + "]";
        if (!m.is_object()) {
          check.fail(where, "must be an object");
          continue;
        }
        auto code = check.string_field(m, "code", where);
        if (code) {
          where = "model '" + *code + "'";
          if (code->empty() || code->find_first_of(",/\\ \t\n") != std::string::npos)
            check.fail(where, "model code must be non-empty without separators");
          if (!codes.insert(*code).second)
            check.fail(where, "duplicate model code");
        }
        auto cmd = check.command(m, "translate_cmd", where);
        if (code && cmd)
          config.models.push_back({*code, *cmd});
      }
    }
  }

  if (const json *classifiers = check.field(doc, "classifiers", "config")) {
    if (!classifiers->is_object())
      check.fail("classifiers", "must be an object keyed by language");
    else
      for (const auto &[lang, c] : classifiers->items()) {
        const std::string where = "classifier '" + lang + "'";
        if (!is_valid_language_code(lang)) {
          check.fail(where, "invalid language code");
          continue;
        }
        if (!c.is_object()) {
          check.fail(where, "must be an object");
          continue;
        }
        auto cmd = check.command(c, "classify_cmd", where);
        std::optional<LabelSet> labels;
        if (const json *ls = check.field(c, "label_set", where)) {
          try {
            labels = LabelSet(ls->get<std::vector<std::string>>());
          } catch (const std::exception &e) {
            check.fail(where, std::string("bad label_set: ") + e.what());
          }
        }
        if (cmd && labels)
          config.classifiers.emplace(lang, ClassifierSpec{*cmd, *labels});
      }
  }

  if (const json *alpha = check.field(doc, "alpha", "config", false)) {
    if (!alpha->is_number() || !(alpha->get<double>() > 0.0 && alpha->get<double>() < 1.0))
      check.fail("alpha", "must be a number in (0,1)");
    else
      config.alpha = alpha->get<double>();
  }

  if (const json *sample = check.field(doc, "sample", "config", false); sample && !sample->is_null()) {
    const json *n = sample->is_object() ? check.field(*sample, "n", "sample") : nullptr;
    const json *seed = sample->is_object() ? check.field(*sample, "seed", "sample", false) : nullptr;
    if (!sample->is_object() || !n || !n->is_number_unsigned() || n->get<std::uint64_t>() == 0 ||
        (seed && !seed->is_number_unsigned()))
      check.fail("sample", "must be {\"n\": positive integer, \"seed\": non-negative integer}");
    else
      config.sample = SampleSpec{n->get<std::size_t>(), seed ? seed->get<std::uint64_t>() : 0};
  }

  if (auto tok = check.string_field(doc, "tokenize", "config", false)) {
    try {
      config.tokenize = bleu::parse_mode(*tok);
    } catch (const std::exception &e) {
      check.fail("tokenize", e.what());
    }
  }

  auto out_dir = check.string_field(doc, "out_dir", "config", false);
  config.out_dir = resolve(base_dir, out_dir.value_or("out"));

  if (const json *bs = check.field(doc, "batch_size", "config", false)) {
    if (!bs->is_number_unsigned() || bs->get<std::size_t>() == 0)
      check.fail("batch_size", "must be a positive integer");
    else
      config.batch_size = bs->get<std::size_t>();
  }
  auto seconds = [&](const char *name, std::chrono::milliseconds &target) {
    if (const json *v = check.field(doc, name, "config", false)) {
      if (!v->is_number() || !(v->get<double>() > 0.0))
        check.fail(name, "must be a positive number of seconds");
      else
        target = std::chrono::milliseconds(static_cast<long long>(v->get<double>() * 1000.0));
    }
  };
  seconds("handshake_timeout_s", config.handshake_timeout);
  seconds("response_timeout_s", config.response_timeout);

  if (!check.problems.empty())
    throw ConfigError(std::move(check.problems));
  config.fingerprint = sha256_hex(doc.dump());
  return config;
}

RunConfig load_config(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError({path.string() + ": cannot open"});
  std::ostringstream ss;
  ss << in.rdbuf();
  json doc = json::parse(ss.str(), nullptr, false);
  if (doc.is_discarded())
    throw ConfigError({path.string() + ": not valid JSON"});
  fs::path base = fs::absolute(path).parent_path();
  return parse_config(doc, base);
}

std::vector<std::string> referential_diagnostics(const RunConfig &config) {
  std::vector<std::string> out;
  for (const auto &c : config.corpora) {
    for (const auto &p : {c.path_a, c.path_b})
      if (!fs::is_regular_file(p))
        out.push_back("corpus '" + c.name + "': file not found: " + p.string());
    for (const auto &[l1, l2] : c.directions)
      if (!config.classifiers.contains(l1.str()))
        out.push_back("corpus '" + c.name + "' pair " + l1.str() + "-" + l2.str() + ": no classifier for l1 '" +
                      l1.str() + "'");
  }
  return out;
}

std::vector<std::string> handshake_diagnostics(const RunConfig &config) {
  std::vector<std::string> out;
  ProcessOptions options;
  options.handshake_timeout = config.handshake_timeout;
  options.response_timeout = config.response_timeout;
  options.working_dir = config.base_dir;

  for (const auto &model : config.models) {
    ProcessAdapter adapter(model.translate_cmd.argv, options, model.translate_cmd.display);
    try {
      const Capabilities &caps = adapter.capabilities();
      std::set<std::pair<LanguageCode, LanguageCode>> needed;
      for (const auto &c : config.corpora)
        for (const auto &[l1, l2] : c.directions) {
          needed.emplace(l1, l2);
          needed.emplace(l2, l1);
        }
      for (const auto &[src, tgt] : needed)
        if (!caps.supports(src, tgt))
          out.push_back("model '" + model.code + "' (" + model.translate_cmd.display + "): does not translate " +
                        src.str() + "->" + tgt.str());
    } catch (const std::exception &e) {
      out.push_back("model '" + model.code + "' (" + model.translate_cmd.display + "): handshake failed: " + e.what());
    }
    adapter.shutdown();
  }
  for (const auto &[lang, entry] : config.classifiers) {
    ProcessAdapter adapter(entry.classify_cmd.argv, options, entry.classify_cmd.display);
    try {
      const LabelSet *declared = adapter.capabilities().labels_for(LanguageCode(lang));
      if (!declared)
        out.push_back("classifier '" + lang + "' (" + entry.classify_cmd.display + "): declares no labels for " + lang);
      else if (*declared != entry.label_set)
        out.push_back("classifier '" + lang + "' (" + entry.classify_cmd.display +
                      "): label set differs from configuration");
    } catch (const std::exception &e) {
      out.push_back("classifier '" + lang + "' (" + entry.classify_cmd.display + "): handshake failed: " + e.what());
    }
    adapter.shutdown();
  }
  return out;
}

} // namespace sentshift
