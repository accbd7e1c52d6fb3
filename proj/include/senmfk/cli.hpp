#pragma once

#include <iosfwd>

#include "senmfk/error.hpp"

namespace senmfk::cli {

/// Process exit codes. Stable contract for scripts.
enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kData = 2,
  kNumerical = 3,
};

ExitCode exit_code_for(ErrorKind kind);

/// Entry point for the `senmfk` tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace senmfk::cli
