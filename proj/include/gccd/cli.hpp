#pragma once

#include <iosfwd>

namespace gccd {

// Process exit codes of the gccd tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 1,       // malformed input, bad arguments, mismatched record lists
  kExitInfeasible = 2,  // the constraint graph admits no segmentation
  kExitIo = 3,          // a file could not be read or written
};

// Entry point of the command-line tool, usable in-process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gccd
