#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cds::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `cds` invocation. `args` excludes the program name. Returns the
/// process exit code.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// Shortest round-trip decimal, with negative zero printed as 0.
std::string format_number(double v);

}  // namespace cds::cli
