#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ovsc::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kDataError = 2, kNumericalFailure = 3 };

/// Run the `ovsc` command line. `args` excludes the program name. Normal
/// output goes to `out`, error messages to `err`, logs to stderr.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ovsc::cli
