#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ergowass {

enum class ErrorKind {
  InvalidParameter,
  InvalidQuery,
  InvalidMeasure,
  InvalidData,
  NumericOverflow,
  UnsupportedSpec,
  Unsupported,
  ShellOverflow,
  TooLarge,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidQuery: return "invalid-query";
    case ErrorKind::InvalidMeasure: return "invalid-measure";
    case ErrorKind::InvalidData: return "invalid-data";
    case ErrorKind::NumericOverflow: return "numeric-overflow";
    case ErrorKind::UnsupportedSpec: return "unsupported-spec";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::ShellOverflow: return "shell-overflow";
    case ErrorKind::TooLarge: return "too-large";
  }
  return "unknown";
}

/// Library error. `kind()` classifies it; the message carries the context
/// (offending state, key, point) where there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures of the numerics rather than of the inputs.
  bool is_numeric() const noexcept { return kind_ == ErrorKind::NumericOverflow || kind_ == ErrorKind::ShellOverflow; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace ergowass
