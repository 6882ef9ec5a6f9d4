#pragma once

#include <string>
#include <vector>

namespace smtm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kInternal = 4,
};

// Runs the command line `args` (args[0] is the program name) and returns the
// process exit code. Diagnostics go to stderr.
int run(std::vector<std::string> args);

}  // namespace smtm::cli
