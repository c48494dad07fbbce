#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fedreverse::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kDataError = 3,
  kVerificationFailed = 4,
};

/// Runs one `fedreverse <subcommand> ...` invocation. Results go to `out` as
/// key=value lines, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fedreverse::cli
