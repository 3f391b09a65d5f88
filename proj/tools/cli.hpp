#pragma once

#include <string>
#include <vector>

namespace stscnn {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

/// Runs one command line (args[0] is the program name) and returns its exit
/// code. Diagnostics go to standard error; results are written to files only.
int cli_dispatch(const std::vector<std::string>& args);

} // namespace stscnn
