#pragma once

#include <stdexcept>
#include <string>

namespace bootrl {

// Category of a failure, stable across releases so that the CLI can emit
// machine-readable error records.
enum class ErrorKind {
  parse,
  invariant,
  out_of_range,
  io,
  missing_input,
  precondition,
  transport,
  http_status,
  empty_completion,
  unsupported,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bootrl
