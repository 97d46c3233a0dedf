#pragma once

#include <exception>
#include <iosfwd>

namespace mirai::cli {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kData = 3,
  kMetric = 4,
  kIo = 5,
  kWarnings = 10,
};

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// Entry point of the `mirai` executable. Output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mirai::cli
