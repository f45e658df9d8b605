#include "support.hpp"

#include "sentshift/cache.hpp"

#include <doctest.h>

#include <thread>

using namespace sentshift;
using testsupport::TempDir;

TEST_CASE("cache keys separate every input") {
  const auto k = ResponseCache::key("translate", "hello", "de", "en", "m1");
  CHECK(k.size() == 64);
  CHECK(k == ResponseCache::key("translate", "hello", "de", "en", "m1"));
  CHECK(k != ResponseCache::key("classify", "hello", "de", "en", "m1"));
  CHECK(k != ResponseCache::key("translate", "hello!", "de", "en", "m1"));
  CHECK(k != ResponseCache::key("translate", "hello", "en", "de", "m1"));
  CHECK(k != ResponseCache::key("translate", "hello", "de", "en", "m2"));
  CHECK(ResponseCache::key("translate", "a", "bc", "d", "m") != ResponseCache::key("translate", "ab", "c", "d", "m"));
}

TEST_CASE("entries persist across instances") {
  TempDir dir;
  const auto key = ResponseCache::key("translate", "x", "de", "en", "m");
  {
    ResponseCache cache(dir / "c");
    CHECK(!cache.get(key));
    cache.put(key, {{"translation", "y"}});
    CHECK(cache.misses() == 1);
  }
  ResponseCache again(dir / "c");
  REQUIRE(again.get(key));
  CHECK((*again.get(key))["translation"] == "y");
  CHECK(again.hits() == 2);

  ResponseCache write_only(dir / "c", false);
  CHECK(!write_only.get(key));
}

TEST_CASE("concurrent writers of one key leave a readable entry") {
  TempDir dir;
  ResponseCache cache(dir / "c");
  const auto key = ResponseCache::key("classify", "t", "", "en", "m");
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i)
        cache.put(key, {{"translation", std::string(200, static_cast<char>('a' + t))}});
    });
  for (auto &th : threads)
    th.join();
  const auto entry = cache.get(key);
  REQUIRE(entry);
  CHECK((*entry)["translation"].get<std::string>().size() == 200);
  std::size_t files = 0;
  for (const auto &e : std::filesystem::recursive_directory_iterator(dir / "c"))
    files += e.is_regular_file();
  CHECK(files == 1);
}
