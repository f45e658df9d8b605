#pragma once

#include "sentshift/adapter.hpp"
#include "sentshift/corpus.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const fs::path &path() const { return path_; }
  fs::path operator/(const std::string &name) const { return path_ / name; }

private:
  fs::path path_;
};

fs::path mock_adapter();
fs::path cli();

bool rel_close(double actual, double expected, double rel, double abs_floor = 0.0);

/// Sentences built from the mock lexicon plus filler words; both sides carry
/// the same text so an identity translator reproduces the original exactly.
sentshift::ParallelCorpus lexicon_corpus(std::size_t n, std::uint64_t seed, const std::string &lang_a = "de",
                                         const std::string &lang_b = "en", const std::string &name = "toy");

void write_text(const fs::path &path, const std::string &content);
std::string read_text(const fs::path &path);

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};
CommandResult run(const std::vector<std::string> &argv, const fs::path &scratch);

/// Mock adapter argv with extra flags, as a JSON array for configuration files.
nlohmann::json mock_command(const std::vector<std::string> &flags = {});

/// Lines of a call log that mark a process start and a request.
std::size_t count_log(const fs::path &log, const std::string &prefix);

/// Protocol conformance checks any adapter implementation must pass: a usable
/// handshake, ids echoed once each regardless of order, survival of malformed
/// lines, and score keys exactly matching the declared label sets.
std::vector<std::string> conformance_failures(sentshift::Adapter &adapter);

} // namespace testsupport
