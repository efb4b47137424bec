#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace meshstab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitParse = 3,
  kExitSolver = 4,
  kExitIo = 5,
};

/// Runs the command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace meshstab::cli
