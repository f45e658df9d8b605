#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace sentshift {

/// Content-addressed store of adapter responses: one JSON file per key.
/// Writes go through a temporary file and an atomic rename, so concurrent
/// writers of the same key are safe.
class ResponseCache {
public:
  /// With `read_enabled` false the cache only records, which is how a fresh
  /// (non-resumed) run refreshes entries.
  explicit ResponseCache(std::filesystem::path dir, bool read_enabled = true);

  static std::string key(std::string_view op, std::string_view text, std::string_view src,
                         std::string_view tgt_or_lang, std::string_view adapter_identity);

  std::optional<nlohmann::json> get(const std::string &key) const;
  void put(const std::string &key, const nlohmann::json &entry) const;

  const std::filesystem::path &dir() const { return dir_; }
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

private:
  std::filesystem::path path_for(const std::string &key) const;

  std::filesystem::path dir_;
  bool read_enabled_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

} // namespace sentshift
