#pragma once

#include "sentshift/adapter.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sentshift {

/// Child process with piped stdin/stdout; stderr is inherited.
class Subprocess {
public:
  /// An empty `working_dir` keeps the parent's directory.
  explicit Subprocess(const std::vector<std::string> &argv, const std::filesystem::path &working_dir = {});
  ~Subprocess();

  Subprocess(const Subprocess &) = delete;
  Subprocess &operator=(const Subprocess &) = delete;

  /// Reads one `\n`-terminated line. Returns nullopt on EOF or timeout.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);

  /// Writes `payload` while collecting up to `expected` response lines, so a
  /// peer that answers before draining its input cannot deadlock the pipe.
  /// Stops early on EOF or when `timeout` elapses without progress.
  std::vector<std::string> transact(const std::string &payload, std::size_t expected,
                                    std::chrono::milliseconds timeout);

  void close_stdin();
  /// Closes stdin and reaps the child; returns its exit status (-1 if signalled).
  int wait();
  pid_t pid() const { return pid_; }

private:
  bool fill_buffer(std::chrono::milliseconds timeout);
  std::optional<std::string> take_line();

  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  bool eof_ = false;
  std::optional<int> status_;
};

struct ProcessOptions {
  std::chrono::milliseconds handshake_timeout{30000};
  std::chrono::milliseconds response_timeout{600000};
  std::filesystem::path working_dir;
};

/// Adapter speaking the JSON-lines protocol with a spawned executable. The
/// process is started lazily on first use, so fully cached runs never spawn it.
class ProcessAdapter : public Adapter {
public:
  /// `display` names the adapter in diagnostics and cache keys; defaults to the
  /// space-joined argv.
  explicit ProcessAdapter(std::vector<std::string> argv, ProcessOptions options = {}, std::string display = {});
  ~ProcessAdapter() override;

  std::string identity() const override { return display_; }
  const Capabilities &capabilities() override;
  std::vector<std::string> exchange(const std::vector<std::string> &request_lines) override;

  bool started() const { return process_ != nullptr; }
  /// Writes a raw line and reads one response line (conformance probing).
  std::optional<std::string> raw_roundtrip(const std::string &line);
  /// Closes the adapter's input and returns its exit status.
  int shutdown();

private:
  void ensure_started();

  std::vector<std::string> argv_;
  ProcessOptions options_;
  std::string display_;
  std::unique_ptr<Subprocess> process_;
  std::optional<Capabilities> caps_;
};

/// Builds an argv from a configured command: a string runs through `/bin/sh -c`.
std::vector<std::string> command_argv(const std::string &shell_command);

} // namespace sentshift
