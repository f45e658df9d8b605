#include "support.hpp"

#include "sentshift/process.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace sentshift;
using testsupport::TempDir;

namespace {

std::vector<std::string> mock_argv(std::vector<std::string> flags = {}) {
  flags.insert(flags.begin(), testsupport::mock_adapter().string());
  return flags;
}

} // namespace

TEST_CASE("mock adapter executable passes the conformance harness") {
  ProcessAdapter adapter(mock_argv());
  const auto failures = testsupport::conformance_failures(adapter);
  for (const auto &f : failures)
    INFO(f);
  CHECK(failures.empty());
  CHECK(adapter.shutdown() == 0);
}

TEST_CASE("conformance harness detects a broken adapter") {
  ProcessAdapter adapter({"/bin/sh", "-c", "echo '{\"caps\":{\"pairs\":[[\"de\",\"en\"]],\"labels\":{}}}'; cat"});
  const auto failures = testsupport::conformance_failures(adapter);
  CHECK(!failures.empty());
}

TEST_CASE("external adapter conformance") {
  const char *cmd = std::getenv("SENTSHIFT_CONFORMANCE_CMD");
  if (!cmd || !*cmd) {
    MESSAGE("SENTSHIFT_CONFORMANCE_CMD not set; skipping external adapter");
    return;
  }
  ProcessAdapter adapter(command_argv(cmd));
  const auto failures = testsupport::conformance_failures(adapter);
  for (const auto &f : failures)
    INFO(f);
  CHECK(failures.empty());
}

TEST_CASE("process adapter translates and classifies") {
  ProcessAdapter adapter(mock_argv({"--binary", "zh"}));
  CHECK(!adapter.started());
  const std::vector<TranslationRequest> reqs = {{"1", "Hallo Welt", LanguageCode("de"), LanguageCode("en")},
                                                {"2", "zweiter Satz", LanguageCode("de"), LanguageCode("en")}};
  const auto out = translate_batch(adapter, reqs, {.chunk_size = 1});
  CHECK(adapter.started());
  CHECK(out.translations.at("1") == "Hallo Welt");
  CHECK(out.translations.at("2") == "zweiter Satz");

  const auto three = classify_batch(adapter, std::vector<SentimentRequest>{{"c", "good", LanguageCode("en")}});
  CHECK(three.label_set.labels() == std::vector<std::string>{"positive", "negative", "neutral"});
  const auto two = classify_batch(adapter, std::vector<SentimentRequest>{{"z", "good", LanguageCode("zh")}});
  CHECK(two.label_set.labels() == std::vector<std::string>{"positive", "negative"});

  const auto raw = adapter.raw_roundtrip("garbage");
  REQUIRE(raw);
  CHECK(raw->find("error") != std::string::npos);
  CHECK(adapter.raw_roundtrip(R"({"op":"translate","id":"9","text":"still here","src":"de","tgt":"en"})")->find(
            "still here") != std::string::npos);
}

TEST_CASE("large batches do not deadlock the pipes") {
  ProcessAdapter adapter(mock_argv());
  std::vector<TranslationRequest> reqs;
  const std::string filler(2000, 'x');
  for (int i = 0; i < 300; ++i)
    reqs.push_back({"r" + std::to_string(i), filler + std::to_string(i), LanguageCode("en"), LanguageCode("de")});
  const auto out = translate_batch(adapter, reqs, {.chunk_size = 300});
  CHECK(out.translations.size() == 300);
  CHECK(out.translations.at("r299") == filler + "299");
}

TEST_CASE("startup and handshake failures") {
  auto kind_of = [](ProcessAdapter &adapter) {
    try {
      adapter.capabilities();
      return std::optional<AdapterError::Kind>{};
    } catch (const AdapterError &e) {
      return std::optional<AdapterError::Kind>{e.kind()};
    }
  };
  ProcessAdapter missing({"/nonexistent/adapter"});
  CHECK(kind_of(missing) == AdapterError::Kind::AdapterUnavailable);
  ProcessAdapter failing(mock_argv({"--fail-handshake"}));
  CHECK(kind_of(failing) == AdapterError::Kind::AdapterUnavailable);
  ProcessAdapter silent({"/bin/sh", "-c", "echo not-a-handshake; cat"});
  CHECK(kind_of(silent) == AdapterError::Kind::AdapterUnavailable);
}

TEST_CASE("a dropped id times out as MissingResponse") {
  ProcessOptions options;
  options.response_timeout = std::chrono::milliseconds(300);
  ProcessAdapter adapter(mock_argv({"--drop-id", "q7"}), options);
  std::vector<TranslationRequest> reqs;
  for (int i = 5; i < 9; ++i)
    reqs.push_back({"q" + std::to_string(i), "t", LanguageCode("de"), LanguageCode("en")});
  try {
    translate_batch(adapter, reqs);
    FAIL("expected MissingResponse");
  } catch (const AdapterError &e) {
    CHECK(e.kind() == AdapterError::Kind::MissingResponse);
    CHECK(e.detail() == "q7");
  }
}

TEST_CASE("an adapter that exits mid-batch is reported, not hung on") {
  ProcessAdapter adapter({"/bin/sh", "-c", "echo '{\"caps\":{\"pairs\":[[\"de\",\"en\"]],\"labels\":{}}}'; head -n 1 >/dev/null"});
  const std::vector<TranslationRequest> reqs = {{"1", "a", LanguageCode("de"), LanguageCode("en")}};
  CHECK_THROWS_AS(translate_batch(adapter, reqs), AdapterError);
}

TEST_CASE("adapters run in the configured working directory") {
  TempDir dir;
  testsupport::write_text(dir / "caps.json", R"({"caps":{"pairs":[["de","en"]],"labels":{}}})" "\n");
  ProcessOptions options;
  options.working_dir = dir.path();
  ProcessAdapter adapter({"/bin/sh", "-c", "cat caps.json; cat >/dev/null"}, options);
  CHECK(adapter.capabilities().supports(LanguageCode("de"), LanguageCode("en")));
}
