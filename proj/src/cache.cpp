#include "sentshift/cache.hpp"

#include "sentshift/hash.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace sentshift {

namespace fs = std::filesystem;

ResponseCache::ResponseCache(fs::path dir, bool read_enabled) : dir_(std::move(dir)), read_enabled_(read_enabled) {
  fs::create_directories(dir_);
}

std::string ResponseCache::key(std::string_view op, std::string_view text, std::string_view src,
                               std::string_view tgt_or_lang, std::string_view adapter_identity) {
  nlohmann::ordered_json k = {{"op", op}, {"text", text}, {"src", src}, {"tgt", tgt_or_lang}, {"adapter", adapter_identity}};
  return sha256_hex(k.dump());
}

fs::path ResponseCache::path_for(const std::string &key) const { return dir_ / (key + ".json"); }

std::optional<nlohmann::json> ResponseCache::get(const std::string &key) const {
  if (!read_enabled_) {
    ++misses_;
    return std::nullopt;
  }
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) {
    ++misses_;
    return std::nullopt;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  auto parsed = nlohmann::json::parse(ss.str(), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return parsed;
}

void ResponseCache::put(const std::string &key, const nlohmann::json &entry) const {
  static std::atomic<std::uint64_t> counter{0};
  const fs::path final_path = path_for(key);
  std::ostringstream tmp_name;
  tmp_name << key << ".tmp." << ::getpid() << "." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "." << counter++;
  const fs::path tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write cache entry " + tmp.string());
    out << entry.dump() << '\n';
  }
  fs::rename(tmp, final_path);
}

} // namespace sentshift
