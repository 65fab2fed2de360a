#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace lgr::cli {

/// Exit codes, stable per error class.
enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kUsageError = 2,   // bad flags, bad config values
  kDataError = 3,    // missing or malformed files and datasets
  kNumericalError = 4,
};

/// Runs one CLI invocation. args excludes the program name. Data goes to
/// files or `out`; progress and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

}  // namespace lgr::cli
