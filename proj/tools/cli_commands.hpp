#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pkrect::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kSuccess = 0,
  kUsageOrIo = 1,
  kInfeasible = 2,
  kTooLarge = 3,
};

/// Runs one CLI invocation. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pkrect::cli
