#pragma once

#include "sentshift/adapter.hpp"
#include "sentshift/bleu.hpp"
#include "sentshift/corpus.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sentshift {

/// A configured adapter command: a JSON string runs through the shell, a JSON
/// array is executed directly. Commands run in the configuration's directory.
struct CommandSpec {
  std::vector<std::string> argv;
  std::string display;
};

struct CorpusSpec {
  std::string name;
  std::filesystem::path path_a;
  std::filesystem::path path_b;
  LanguageCode lang_a;
  LanguageCode lang_b;
  /// Ordered (l1, l2) pairs to audit; both orientations unless configured.
  std::vector<std::pair<LanguageCode, LanguageCode>> directions;
};

struct ModelSpec {
  std::string code;
  CommandSpec translate_cmd;
};

struct ClassifierSpec {
  CommandSpec classify_cmd;
  LabelSet label_set;
};

struct SampleSpec {
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::filesystem::path base_dir;
  std::vector<CorpusSpec> corpora;
  std::vector<ModelSpec> models;
  std::map<std::string, ClassifierSpec> classifiers;
  double alpha = 0.05;
  std::optional<SampleSpec> sample;
  bleu::TokenizeMode tokenize = bleu::TokenizeMode::whitespace;
  std::filesystem::path out_dir;
  std::size_t batch_size = 64;
  std::chrono::milliseconds handshake_timeout{30000};
  std::chrono::milliseconds response_timeout{600000};
  /// SHA-256 of the canonical (key-sorted) configuration document.
  std::string fingerprint;
};

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string> &diagnostics() const { return diagnostics_; }

private:
  std::vector<std::string> diagnostics_;
};

/// Schema and referential checks. Collects every problem before throwing.
RunConfig parse_config(const nlohmann::json &doc, const std::filesystem::path &base_dir);
RunConfig load_config(const std::filesystem::path &path);

/// Problems that do not prevent parsing: missing files, missing classifiers.
std::vector<std::string> referential_diagnostics(const RunConfig &config);

/// Spawns every configured adapter and checks its handshake against the configuration.
std::vector<std::string> handshake_diagnostics(const RunConfig &config);

} // namespace sentshift
