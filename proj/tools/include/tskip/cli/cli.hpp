#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tskip::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kDivergence = 3 };

/// Runs the tool with `args` (without the program name). Output goes to
/// `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tskip::cli
