#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kpbench::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitIo = 2,
  kExitPartial = 3,
};

// Runs the kpbench command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kpbench::cli
