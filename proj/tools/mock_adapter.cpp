// Line-protocol adapter backed by the deterministic mocks. Used by the tests and
// as a reference peer for adapter authors.
#include "sentshift/adapter.hpp"
#include "sentshift/mock.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <unistd.h>

int main(int argc, char **argv) {
  using namespace sentshift;
  CLI::App app{"sentshift mock adapter"};
  MockOptions options;
  std::string translation = "identity";
  std::string call_log;
  bool no_classify = false;
  bool fail_handshake = false;
  std::vector<std::string> binary;
  std::vector<std::string> drop;
  app.add_option("--translate", translation, "none, identity or biased")
      ->check(CLI::IsMember({"none", "identity", "biased"}));
  app.add_option("--shift", options.shift_fraction, "fraction of positive tokens rewritten")->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", options.seed);
  app.add_option("--model", options.model);
  app.add_option("--languages", options.languages)->delimiter(',');
  app.add_option("--binary", binary, "languages with a positive/negative classifier")->delimiter(',');
  app.add_option("--drop-id", drop, "ids that never get a response")->delimiter(',');
  app.add_option("--fail-substring", options.fail_substrings);
  app.add_flag("--no-classify", no_classify);
  app.add_flag("--fail-handshake", fail_handshake, "exit before announcing capabilities");
  app.add_option("--call-log", call_log, "append one line per start and per request");
  CLI11_PARSE(app, argc, argv);

  options.translation = translation == "none"       ? MockOptions::Translation::None
                        : translation == "biased"   ? MockOptions::Translation::Biased
                                                    : MockOptions::Translation::Identity;
  options.classify = !no_classify;
  options.binary_languages.insert(binary.begin(), binary.end());
  options.drop_ids.insert(drop.begin(), drop.end());

  std::FILE *log = nullptr;
  if (!call_log.empty()) {
    log = std::fopen(call_log.c_str(), "a");
    if (log) {
      std::fprintf(log, "start %ld\n", static_cast<long>(getpid()));
      std::fflush(log);
    }
  }
  if (fail_handshake)
    return 3;

  const MockServer server(options);
  std::ios::sync_with_stdio(false);
  std::cout << protocol::serialize_caps(server.capabilities()) << std::endl;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (log) {
      std::fprintf(log, "request\n");
      std::fflush(log);
    }
    if (auto reply = server.handle(line))
      std::cout << *reply << std::endl;
  }
  if (log)
    std::fclose(log);
  return 0;
}
