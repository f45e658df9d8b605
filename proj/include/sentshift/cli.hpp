#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sentshift::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

/// Environment variable that relocates the response cache.
inline constexpr const char *kCacheDirEnv = "SENTSHIFT_CACHE_DIR";

int cmd_validate(const std::filesystem::path &config_path, std::ostream &out, std::ostream &err);

struct RunOptions {
  bool resume = false;
  unsigned jobs = 1;
};

int cmd_run(const std::filesystem::path &config_path, const RunOptions &options, std::ostream &out,
            std::ostream &err);

/// One real per line; blank lines are skipped. Errors name file and line.
std::vector<double> read_column(const std::filesystem::path &path);

struct StatsArgs {
  std::string subcommand;
  std::filesystem::path first;
  std::filesystem::path second;
  std::string alternative = "two-sided";
  std::string tokenize = "whitespace";
  bool fit = false;
};

/// Thin wrappers over the stats and BLEU primitives; prints 12 significant digits.
int cmd_stats(const StatsArgs &args, std::ostream &out, std::ostream &err);

} // namespace sentshift::cli
