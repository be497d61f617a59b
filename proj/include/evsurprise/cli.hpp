#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evsurprise {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitParse = 2,
  kExitDomain = 3,
  kExitNumerical = 4,
  kExitEmpty = 5,
  kExitIo = 6,
};

/// Runs one CLI invocation. `args` excludes the program name; the first
/// element is the command (simulate | sweep | transform | classical).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evsurprise
