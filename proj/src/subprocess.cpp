#include "trapline/subprocess.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "trapline/error.hpp"

extern char** environ;

namespace trapline {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::filesystem::path make_stderr_file() {
  auto pattern = (std::filesystem::temp_directory_path() / "trapline-stderr-XXXXXX").string();
  int fd = ::mkstemp(pattern.data());
  if (fd < 0) throw Error("cannot create temporary file: " + std::string(std::strerror(errno)));
  ::close(fd);
  return pattern;
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv) : Subprocess(argv, Options{}) {}

Subprocess::Subprocess(const std::vector<std::string>& argv, Options options) {
  if (argv.empty()) throw Error("empty command line");
  ignore_sigpipe();

  int in_pipe[2] = {-1, -1};
  int out_pipe[2] = {-1, -1};
  if (options.pipe_stdin && ::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error("pipe failed");
  if (options.pipe_stdout && ::pipe2(out_pipe, O_CLOEXEC) != 0) throw Error("pipe failed");

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  if (options.pipe_stdin) posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  else posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  if (options.pipe_stdout) posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  else posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  if (options.capture_stderr) {
    stderr_path_ = make_stderr_file();
    posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, stderr_path_.c_str(),
                                     O_WRONLY | O_TRUNC, 0600);
  }

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  int rc = ::posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (options.pipe_stdin) ::close(in_pipe[0]);
  if (options.pipe_stdout) ::close(out_pipe[1]);
  if (rc != 0) {
    if (options.pipe_stdin) ::close(in_pipe[1]);
    if (options.pipe_stdout) ::close(out_pipe[0]);
    pid_ = -1;
    throw Error("cannot start '" + argv[0] + "': " + std::strerror(rc));
  }
  stdin_fd_ = in_pipe[1];
  stdout_fd_ = out_pipe[0];
}

Subprocess::~Subprocess() {
  try {
    if (stdout_fd_ >= 0) {
      ::close(stdout_fd_);
      stdout_fd_ = -1;
    }
    wait();
  } catch (...) {
  }
  if (!stderr_path_.empty()) {
    std::error_code ec;
    std::filesystem::remove(stderr_path_, ec);
  }
}

void Subprocess::write(std::string_view data) {
  if (stdin_fd_ < 0) throw Error("child stdin is closed");
  while (!data.empty()) {
    ssize_t n = ::write(stdin_fd_, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("write to child failed: " + std::string(std::strerror(errno)));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void Subprocess::close_stdin() {
  if (stdin_fd_ >= 0) {
    ::close(stdin_fd_);
    stdin_fd_ = -1;
  }
}

std::optional<std::string> Subprocess::read_line() {
  if (stdout_fd_ < 0) return std::nullopt;
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    char chunk[4096];
    ssize_t n = ::read(stdout_fd_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

int Subprocess::wait() {
  close_stdin();
  if (status_) return *status_;
  if (pid_ <= 0) return -1;
  int raw = 0;
  while (::waitpid(pid_, &raw, 0) < 0) {
    if (errno != EINTR) throw Error("waitpid failed");
  }
  pid_ = -1;
  if (WIFEXITED(raw)) status_ = WEXITSTATUS(raw);
  else if (WIFSIGNALED(raw)) status_ = 128 + WTERMSIG(raw);
  else status_ = -1;
  return *status_;
}

std::string Subprocess::diagnostics() const {
  if (stderr_path_.empty()) return {};
  std::ifstream in(stderr_path_, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  constexpr std::size_t kLimit = 4096;
  if (text.size() > kLimit) text = text.substr(text.size() - kLimit);
  return text;
}

}  // namespace trapline
