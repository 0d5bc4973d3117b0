#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cds {

enum class ErrorCode {
  kInvalidArgument,  // malformed input, unknown word, bad field
  kOutOfRange,       // heuristic number or Likert value outside bounds
  kIntegrity,        // catalog fails a structural invariant
  kSchema,           // record document does not match the critique schema
  kNotFound,
  kConflict,         // mutation of a finalized sheet, cross-artefact diff
  kIncomplete,       // finalize or score with missing items
  kUndefined,        // statistic undefined for the input (zero variance etc.)
  kIo,
};

const char* error_code_name(ErrorCode code);

/// Base of every error raised by the library. `details` carries
/// machine-readable items (missing heuristic numbers, offending words).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace cds
