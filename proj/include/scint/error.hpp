#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scint {

enum class ErrorKind {
  MalformedField,
  MissingColumn,
  RangeViolation,
  InvalidTime,
  UnsortedInput,
  InsufficientClass,
  NetworkError,
  ServiceError,
  EmptyRange,
  MalformedPayload,
  EmptyDataset,
  TooFewRows,
  SchemaMismatch,
  EmptyClass,
  LabelOutOfRange,
  LengthMismatch,
  EmptyMatrix,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. Every failure carries a kind so callers (and the
/// CLI's stage tagging) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 protected:
  struct Preformatted {};
  Error(Preformatted, ErrorKind kind, const std::string& what_text) : std::runtime_error(what_text), kind_(kind) {}

 private:
  ErrorKind kind_;
};

}  // namespace scint
