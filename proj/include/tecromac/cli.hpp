#pragma once

#include <iosfwd>

namespace tecromac {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitInput = 3,
  kExitDivergence = 4,
};

/// Entry point of the `tecromac` tool; diagnostics go to `err`.
int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
int cli_main(int argc, const char *const *argv);

}  // namespace tecromac
