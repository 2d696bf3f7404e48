#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace memix::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kValidation = 3,
};

// Entry point for the `memix` tool. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace memix::cli
