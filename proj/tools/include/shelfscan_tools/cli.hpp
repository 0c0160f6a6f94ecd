#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shelfscan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command. `args` excludes the program name. Reports go to files
/// under the output directory; short summaries go to `out`, JSON error
/// records to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace shelfscan::cli
