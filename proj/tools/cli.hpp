#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace parking::cli {

/// Exit codes of the parking tool.
enum ExitCode : int {
  kOk = 0,
  kComparisonFailed = 1,
  kConfigError = 2,
};

/// Runs the tool on `args` (without the program name). Normal output goes to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace parking::cli
