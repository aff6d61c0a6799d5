#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shscert {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitFail = 1,
  kExitInconclusive = 2,
  kExitMalformed = 3,
};

/// Runs the command line `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace shscert
