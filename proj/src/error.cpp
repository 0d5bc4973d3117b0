#include "cds/error.hpp"

namespace cds {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kOutOfRange:
      return "out_of_range";
    case ErrorCode::kIntegrity:
      return "integrity";
    case ErrorCode::kSchema:
      return "schema";
    case ErrorCode::kNotFound:
      return "not_found";
    case ErrorCode::kConflict:
      return "conflict";
    case ErrorCode::kIncomplete:
      return "incomplete";
    case ErrorCode::kUndefined:
      return "undefined";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace cds
