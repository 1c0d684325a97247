#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace occtune {

enum class ErrorKind {
  NotFound,
  Parse,
  Invariant,
  EmptyInput,
  IllegalLaunch,
  UnsupportedArch,
  NoCandidates,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library is an occtune::Error. `line()` is the
// 1-based input line for parse errors, 0 otherwise; `field()` names the
// offending field for invariant violations.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, int line = 0, std::string field = {});

  ErrorKind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorKind kind_;
  int line_;
  std::string field_;
};

}  // namespace occtune
