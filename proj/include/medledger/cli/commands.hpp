#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace medledger::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitUsage = 2,
  kExitPermissionDenied = 3,
  kExitIntegrity = 4,
  kExitNotFound = 5,
  kExitUnwrap = 6,
};

/// Runs the command line tool in-process. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// "10..100" with `step`, or a comma list "10,20,50". Throws InvalidArgument
/// on zero, empty or malformed input.
std::vector<std::size_t> parse_counts(std::string_view text, std::size_t step = 10);

}  // namespace medledger::cli
