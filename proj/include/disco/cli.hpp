#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace disco {

/// Process exit codes of the `disco` command.
enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitConfig = 2,
  kExitOverwrite = 3,
  kExitProvider = 4,
};

/// Entry point of the `disco` command line. Data goes to `out`, diagnostics
/// to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv);

}  // namespace disco
