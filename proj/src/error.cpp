#include "scint/error.hpp"

namespace scint {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedField: return "MalformedField";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::InvalidTime: return "InvalidTime";
    case ErrorKind::UnsortedInput: return "UnsortedInput";
    case ErrorKind::InsufficientClass: return "InsufficientClass";
    case ErrorKind::NetworkError: return "NetworkError";
    case ErrorKind::ServiceError: return "ServiceError";
    case ErrorKind::EmptyRange: return "EmptyRange";
    case ErrorKind::MalformedPayload: return "MalformedPayload";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace scint
