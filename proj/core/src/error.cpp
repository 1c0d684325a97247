#include "occtune/error.hpp"

namespace occtune {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Invariant: return "invariant";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::IllegalLaunch: return "illegal-launch";
    case ErrorKind::UnsupportedArch: return "unsupported-arch";
    case ErrorKind::NoCandidates: return "no-candidates";
  }
  return "unknown";
}

namespace {

std::string decorate(const std::string& message, int line) {
  if (line <= 0) return message;
  return "line " + std::to_string(line) + ": " + message;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, int line, std::string field)
    : std::runtime_error(decorate(message, line)),
      kind_(kind),
      line_(line),
      field_(std::move(field)) {}

}  // namespace occtune
