#pragma once

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace callctx {

class ProcessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A child process with its stdin/stdout connected to pipes. stderr is
// inherited unless redirected to /dev/null.
class ChildProcess {
 public:
  ChildProcess(const std::vector<std::string>& argv, bool quiet_stderr = false);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  int stdin_fd() const { return stdin_fd_; }
  int stdout_fd() const { return stdout_fd_; }
  pid_t pid() const { return pid_; }

  // Writes all of `data`; false when the pipe is closed.
  bool write_all(std::string_view data);
  void close_stdin();

  bool running();
  // Waits up to `grace` for exit, then kills. Returns the exit status when known.
  std::optional<int> terminate(std::chrono::milliseconds grace = std::chrono::milliseconds(500));

 private:
  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::optional<int> status_;
};

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

// Runs a command to completion, capturing stdout and stderr together.
CommandResult run_command(const std::vector<std::string>& argv);

std::vector<std::string> split_command_line(const std::string& command);

}  // namespace callctx
