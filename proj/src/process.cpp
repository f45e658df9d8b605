#include "sentshift/process.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace sentshift {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

} // namespace

Subprocess::Subprocess(const std::vector<std::string> &argv, const std::filesystem::path &working_dir) {
  if (argv.empty())
    throw std::invalid_argument("empty command");
  ignore_sigpipe();

  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0)
    throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<char *> args;
  args.reserve(argv.size() + 1);
  for (const auto &a : argv)
    args.push_back(const_cast<char *>(a.c_str()));
  args.push_back(nullptr);

  const std::string cwd = working_dir.string();
  pid_ = ::fork();
  if (pid_ < 0)
    throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0)
      ::_exit(127);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  in_fd_ = to_child[1];
  out_fd_ = from_child[0];
}

Subprocess::~Subprocess() {
  close_stdin();
  if (!status_ && pid_ > 0) {
    // Give a well-behaved adapter a moment to exit on EOF before killing it.
    for (int i = 0; i < 50; ++i) {
      int st = 0;
      if (::waitpid(pid_, &st, WNOHANG) == pid_) {
        status_ = st;
        break;
      }
      ::usleep(10000);
    }
    if (!status_) {
      ::kill(pid_, SIGKILL);
      int st = 0;
      ::waitpid(pid_, &st, 0);
    }
  }
  if (out_fd_ >= 0)
    ::close(out_fd_);
}

void Subprocess::close_stdin() {
  if (in_fd_ >= 0) {
    ::close(in_fd_);
    in_fd_ = -1;
  }
}

int Subprocess::wait() {
  close_stdin();
  if (!status_) {
    int st = 0;
    while (::waitpid(pid_, &st, 0) < 0 && errno == EINTR) {
    }
    status_ = st;
  }
  return WIFEXITED(*status_) ? WEXITSTATUS(*status_) : -1;
}

std::optional<std::string> Subprocess::take_line() {
  auto nl = buffer_.find('\n');
  if (nl == std::string::npos)
    return std::nullopt;
  std::string line = buffer_.substr(0, nl);
  buffer_.erase(0, nl + 1);
  return line;
}

bool Subprocess::fill_buffer(std::chrono::milliseconds timeout) {
  if (eof_)
    return false;
  pollfd pfd{out_fd_, POLLIN, 0};
  int rc;
  do {
    rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  } while (rc < 0 && errno == EINTR);
  if (rc <= 0)
    return false;
  char chunk[65536];
  ssize_t n;
  do {
    n = ::read(out_fd_, chunk, sizeof chunk);
  } while (n < 0 && errno == EINTR);
  if (n <= 0) {
    eof_ = true;
    return false;
  }
  buffer_.append(chunk, static_cast<std::size_t>(n));
  return true;
}

std::optional<std::string> Subprocess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  while (true) {
    if (auto line = take_line())
      return line;
    if (!fill_buffer(std::chrono::milliseconds(remaining_ms(deadline))))
      return std::nullopt;
  }
}

std::vector<std::string> Subprocess::transact(const std::string &payload, std::size_t expected,
                                              std::chrono::milliseconds timeout) {
  std::vector<std::string> lines;
  std::size_t written = 0;
  if (in_fd_ < 0)
    written = payload.size();
  else
    ::fcntl(in_fd_, F_SETFL, ::fcntl(in_fd_, F_GETFL) | O_NONBLOCK);

  auto deadline = Clock::now() + timeout;
  while (lines.size() < expected) {
    if (auto line = take_line()) {
      lines.push_back(std::move(*line));
      deadline = Clock::now() + timeout;
      continue;
    }
    if (eof_)
      break;

    pollfd fds[2] = {{out_fd_, POLLIN, 0}, {in_fd_, POLLOUT, 0}};
    const nfds_t nfds = written < payload.size() ? 2 : 1;
    int rc = ::poll(fds, nfds, remaining_ms(deadline));
    if (rc < 0 && errno == EINTR)
      continue;
    if (rc <= 0)
      break;
    if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t n = ::write(in_fd_, payload.data() + written, payload.size() - written);
      if (n > 0)
        written += static_cast<std::size_t>(n);
      else if (n < 0 && errno != EAGAIN && errno != EINTR)
        written = payload.size(); // peer closed its input; keep reading what it sent
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      if (fill_buffer(std::chrono::milliseconds(0)))
        deadline = Clock::now() + timeout;
    }
  }
  if (in_fd_ >= 0)
    ::fcntl(in_fd_, F_SETFL, ::fcntl(in_fd_, F_GETFL) & ~O_NONBLOCK);
  return lines;
}

std::vector<std::string> command_argv(const std::string &shell_command) {
  return {"/bin/sh", "-c", shell_command};
}

ProcessAdapter::ProcessAdapter(std::vector<std::string> argv, ProcessOptions options, std::string display)
    : argv_(std::move(argv)), options_(options), display_(std::move(display)) {
  if (display_.empty()) {
    for (const auto &a : argv_) {
      if (!display_.empty())
        display_ += ' ';
      display_ += a;
    }
  }
}

ProcessAdapter::~ProcessAdapter() = default;

void ProcessAdapter::ensure_started() {
  if (process_)
    return;
  try {
    process_ = std::make_unique<Subprocess>(argv_, options_.working_dir);
  } catch (const std::exception &e) {
    throw AdapterError(AdapterError::Kind::AdapterUnavailable, "cannot start adapter '" + display_ + "': " + e.what(),
                       display_);
  }
  auto line = process_->read_line(options_.handshake_timeout);
  if (!line) {
    process_.reset();
    throw AdapterError(AdapterError::Kind::AdapterUnavailable, "adapter '" + display_ + "' sent no handshake",
                       display_);
  }
  try {
    caps_ = protocol::parse_caps(*line);
  } catch (const std::exception &e) {
    process_.reset();
    throw AdapterError(AdapterError::Kind::AdapterUnavailable,
                       "adapter '" + display_ + "' sent an invalid handshake: " + e.what(), display_);
  }
}

const Capabilities &ProcessAdapter::capabilities() {
  ensure_started();
  return *caps_;
}

std::vector<std::string> ProcessAdapter::exchange(const std::vector<std::string> &request_lines) {
  ensure_started();
  std::string payload;
  for (const auto &l : request_lines) {
    payload += l;
    payload += '\n';
  }
  return process_->transact(payload, request_lines.size(), options_.response_timeout);
}

std::optional<std::string> ProcessAdapter::raw_roundtrip(const std::string &line) {
  ensure_started();
  auto lines = process_->transact(line + "\n", 1, options_.response_timeout);
  if (lines.empty())
    return std::nullopt;
  return lines.front();
}

int ProcessAdapter::shutdown() {
  if (!process_)
    return 0;
  int status = process_->wait();
  process_.reset();
  return status;
}

} // namespace sentshift
