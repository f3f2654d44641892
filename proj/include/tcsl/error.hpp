#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcsl {

enum class ErrorKind {
  invalid_argument,
  domain,
  singular_fit,
  insufficient_data,
  not_found,
  empty_input,
  io,
  unfitted,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::domain: return "domain";
    case ErrorKind::singular_fit: return "singular-fit";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::io: return "io";
    case ErrorKind::unfitted: return "unfitted";
  }
  return "unknown";
}

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace tcsl
