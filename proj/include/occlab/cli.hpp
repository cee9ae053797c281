#pragma once

#include <iosfwd>

namespace occlab {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitGate = 3,
};

/// Runs one subcommand. Output directories come from --out, then the
/// OCCLAB_OUTPUT_DIR environment variable, then "out".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace occlab
