#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trapline {

/// A child process with optional pipes on stdin/stdout and stderr captured
/// to a private temporary file. The destructor closes the pipes and reaps
/// the child.
class Subprocess {
 public:
  struct Options {
    bool pipe_stdin = true;
    bool pipe_stdout = true;
    bool capture_stderr = true;
  };

  explicit Subprocess(const std::vector<std::string>& argv);
  Subprocess(const std::vector<std::string>& argv, Options options);
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// Writes all of data to the child's stdin. Throws Error if the child has
  /// closed its end.
  void write(std::string_view data);
  void close_stdin();

  /// One line from stdout without the trailing newline; nullopt at EOF.
  std::optional<std::string> read_line();

  /// Closes stdin and waits. Returns the exit code, or 128+signal.
  int wait();

  bool running() const { return pid_ > 0; }

  /// Whatever the child wrote to stderr so far (truncated to the last 4 KiB).
  std::string diagnostics() const;

 private:
  int pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::optional<int> status_;
  std::filesystem::path stderr_path_;
  std::string buffer_;
};

}  // namespace trapline
