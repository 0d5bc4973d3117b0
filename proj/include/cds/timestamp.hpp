#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace cds {

/// UTC instant with millisecond resolution, the precision used on the wire.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

Timestamp now_utc();

/// RFC-3339 in UTC with millisecond fraction, e.g. 2025-03-01T09:30:00.250Z.
std::string format_rfc3339(Timestamp t);

/// Accepts RFC-3339 with a `Z` or `+00:00` offset and 0-9 fractional digits
/// (truncated to milliseconds). Non-UTC offsets are rejected.
/// Throws Error(kInvalidArgument).
Timestamp parse_rfc3339(std::string_view text);

}  // namespace cds
