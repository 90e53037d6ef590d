/* Copyright 2026 The Effbench Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef EFFBENCH_SUBPROCESS_H_
#define EFFBENCH_SUBPROCESS_H_

#include <sys/types.h>

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace effbench {

enum class ReadStatus { kLine, kTimeout, kEof };

/// \brief A child process run through `/bin/sh -c` with its stdin and
/// stdout connected to pipes. stderr is inherited.
///
/// Move-only; the destructor kills a child that is still running.
class Subprocess {
 public:
  /// Throws std::system_error if the child cannot be spawned.
  static Subprocess Spawn(const std::string& command,
                          const std::map<std::string, std::string>& env = {});

  Subprocess(Subprocess&& other) noexcept;
  Subprocess& operator=(Subprocess&& other) noexcept;
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  ~Subprocess();

  /// Writes `line` plus a newline to the child's stdin. False once the pipe
  /// is broken.
  bool WriteLine(std::string_view line);
  void CloseStdin();

  /// Next newline-terminated line from stdout, without the newline. A
  /// trailing unterminated fragment is returned as a line before kEof.
  ReadStatus ReadLine(std::string& line, std::chrono::milliseconds timeout);

  /// Waits up to `grace` for exit, then SIGKILLs. Returns the exit status,
  /// or 128 + signal number for a signalled child.
  int Wait(std::chrono::milliseconds grace);
  void Kill();

  pid_t pid() const { return pid_; }

 private:
  Subprocess() = default;
  void Close();

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::string buffer_;
  bool eof_ = false;
  std::optional<int> exit_code_;
};

/// Replaces every `{name}` in `command_template` with the mapped value.
std::string SubstitutePlaceholders(
    std::string command_template,
    const std::map<std::string, std::string>& values);

/// Single-quotes `text` for /bin/sh.
std::string ShellQuote(std::string_view text);

}  // namespace effbench

#endif  // EFFBENCH_SUBPROCESS_H_
